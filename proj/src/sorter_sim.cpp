#include "oamdisc/sorter_sim.hpp"

#include <algorithm>
#include <cmath>

#include "oamdisc/errors.hpp"
#include "oamdisc/fft.hpp"

namespace oamdisc {

LogAxis::LogAxis(double r_min, double r_max, int n_u) : r_min_(r_min), r_max_(r_max), n_u_(n_u) {
  if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max)) {
    throw DomainError("log-polar annulus needs 0 < r_min < r_max");
  }
  if (n_u < 2) throw DomainError("log axis needs at least two cells");
  du_ = std::log(r_max / r_min) / n_u;
}

double LogAxis::cell_inner(int j) const {
  return j == 0 ? r_min_ : std::exp(std::log(r_min_) + j * du_);
}

double LogAxis::cell_outer(int j) const {
  return j == n_u_ - 1 ? r_max_ : std::exp(std::log(r_min_) + (j + 1) * du_);
}

double LogAxis::jacobian(int j) const {
  const double a = cell_inner(j);
  const double b = cell_outer(j);
  return std::sqrt((b * b - a * a) / (2.0 * du_));
}

double LogPolarField::weight() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  return s * axis.du() * dv();
}

double LogProfile::weight() const {
  double s = 0.0;
  for (const cplx& v : values) s += std::norm(v);
  return s * du;
}

SorterConfig SorterConfig::defaults(const GridSpec& grid) { return SorterConfig{2.0 * grid.pixel(), 256, 256}; }

LogPolarField log_polar_unwrap(const ComplexField& field, Point2 center, double r_min, double r_max,
                               int n_u, int n_v) {
  const GridSpec& g = field.grid();
  const double reach = std::min({center.x - g.min_coord(), g.max_coord() - center.x,
                                 center.y - g.min_coord(), g.max_coord() - center.y});
  if (r_max > reach + 1e-9 * g.pixel()) throw DomainError("annulus exceeds the grid");
  if (n_v < 2) throw DomainError("need at least two angular samples");
  LogPolarField lp{LogAxis(r_min, r_max, n_u), n_v, std::vector<cplx>(static_cast<std::size_t>(n_u) * n_v)};
  for (int j = 0; j < n_u; ++j) {
    const double r = lp.axis.radius(j);
    const double jac = lp.axis.jacobian(j);
    for (int l = 0; l < n_v; ++l) {
      const double t = constants::two_pi * l / n_v;
      lp.values[static_cast<std::size_t>(j) * n_v + l] =
          jac * field.sample(center.x + r * std::cos(t), center.y + r * std::sin(t));
    }
  }
  return lp;
}

ComplexField log_polar_rewrap(const LogPolarField& lp, const GridSpec& grid, Point2 center) {
  ComplexField out(grid);
  const LogAxis& ax = lp.axis;
  const int n_u = ax.n_u();
  const int n_v = lp.n_v;
  auto amp = [&](int j, int l) { return lp.values[static_cast<std::size_t>(j) * n_v + l] / ax.jacobian(j); };
  for (int iy = 0; iy < grid.n(); ++iy) {
    const double y = grid.coord(iy) - center.y;
    for (int ix = 0; ix < grid.n(); ++ix) {
      const double x = grid.coord(ix) - center.x;
      const double r = std::hypot(x, y);
      if (r < ax.r_min() || r > ax.r_max()) continue;
      const double t = std::clamp((std::log(r) - std::log(ax.r_min())) / ax.du() - 0.5, 0.0,
                                  static_cast<double>(n_u - 1));
      const int j0 = std::min(static_cast<int>(t), n_u - 2);
      const double fu = t - j0;
      double theta = std::atan2(y, x);
      if (theta < 0.0) theta += constants::two_pi;
      const double s = theta / lp.dv();
      const int l0 = static_cast<int>(std::floor(s)) % n_v;
      const int l1 = (l0 + 1) % n_v;
      const double fv = s - std::floor(s);
      out.at(ix, iy) = (1.0 - fu) * ((1.0 - fv) * amp(j0, l0) + fv * amp(j0, l1)) +
                       fu * ((1.0 - fv) * amp(j0 + 1, l0) + fv * amp(j0 + 1, l1));
    }
  }
  return out;
}

std::map<int, LogProfile> separate_channels(const LogPolarField& lp) {
  const int n_u = lp.axis.n_u();
  const int n_v = lp.n_v;
  std::map<int, LogProfile> out;
  for (int k = 0; k < n_v; ++k) {
    const int m = k < n_v / 2 ? k : k - n_v;
    out[m] = LogProfile{lp.axis.du(), std::vector<cplx>(n_u)};
  }
  const double scale = std::sqrt(constants::two_pi) / n_v;
  std::vector<cplx> row(n_v);
  for (int j = 0; j < n_u; ++j) {
    std::copy_n(lp.values.begin() + static_cast<std::ptrdiff_t>(j) * n_v, n_v, row.begin());
    fft::forward(row);
    for (int k = 0; k < n_v; ++k) {
      const int m = k < n_v / 2 ? k : k - n_v;
      out[m].values[j] = row[k] * scale;
    }
  }
  return out;
}

std::map<int, double> channel_weights(const std::map<int, LogProfile>& channels) {
  std::map<int, double> w;
  double total = 0.0;
  for (const auto& [m, p] : channels) {
    w[m] = p.weight();
    total += w[m];
  }
  if (total > 0.0) {
    for (auto& [m, v] : w) v /= total;
  }
  return w;
}

LogProfile phase_flatten(const LogProfile& profile, const LogProfile& target) {
  if (profile.values.size() != target.values.size()) throw DomainError("profile and target lengths differ");
  LogProfile out = profile;
  for (std::size_t j = 0; j < out.values.size(); ++j) {
    const double a = std::abs(target.values[j]);
    if (a == 0.0) continue;
    out.values[j] *= std::conj(target.values[j]) / a;
  }
  return out;
}

std::vector<double> radial_diffract(const LogProfile& profile) {
  const int n = static_cast<int>(profile.values.size());
  std::vector<cplx> work = profile.values;
  fft::forward(work);
  std::vector<double> out(n);
  const double scale = profile.du / n;
  for (int k = 0; k < n; ++k) {
    const int bin = (k + n / 2) % n;
    out[bin] = std::norm(work[k]) * scale;
  }
  return out;
}

RadialToLog::RadialToLog(const RadialGrid& radial, const LogAxis& axis) : radial_(radial), axis_(axis) {
  if (axis.r_max() > radial.r_max() * (1.0 + 1e-12)) throw DomainError("log axis extends beyond the radial grid");
  const double dr = radial.dr();
  for (int k = 0; k < axis.n_u(); ++k) {
    const double a = axis.cell_inner(k);
    const double b = axis.cell_outer(k);
    const double area = 0.5 * (b * b - a * a);
    const int j_lo = std::max(0, static_cast<int>(std::floor(a / dr)));
    const int j_hi = std::min(radial.n_r() - 1, static_cast<int>(std::floor(b / dr)));
    // g_k = (area-weighted mean over the cell) * sqrt(area / du)
    const double norm = std::sqrt(area / axis.du()) / area;
    for (int j = j_lo; j <= j_hi; ++j) {
      const double lo = std::max(a, j * dr);
      const double hi = std::min(b, (j + 1) * dr);
      if (hi <= lo) continue;
      entries_.push_back({k, j, 0.5 * (hi * hi - lo * lo) * norm});
    }
  }
}

LogProfile RadialToLog::apply(std::span<const cplx> chi) const {
  if (chi.size() != static_cast<std::size_t>(radial_.n_r())) throw DomainError("radial profile length mismatch");
  LogProfile out{axis_.du(), std::vector<cplx>(axis_.n_u())};
  for (const Entry& e : entries_) out.values[e.log_cell] += e.coeff * chi[e.radial_bin];
  return out;
}

double DetectorImage::total() const {
  double s = 0.0;
  for (double v : intensity) s += v;
  return s;
}

std::vector<double> DetectorImage::layout() const {
  const int cols = n_channels();
  std::vector<double> img(static_cast<std::size_t>(n_bins) * cols);
  for (int c = 0; c < cols; ++c) {
    for (int b = 0; b < n_bins; ++b) {
      img[static_cast<std::size_t>(b) * cols + c] = intensity[static_cast<std::size_t>(c) * n_bins + b];
    }
  }
  return img;
}

namespace {

LogAxis sorter_axis(const RadialGrid& rg, const SorterConfig& config) {
  return LogAxis(config.r_min, rg.r_max(), config.n_u);
}

}  // namespace

DetectorImage physical_measurement_distribution(const MixedState& state, const MeasurementScheme& scheme,
                                                const SorterConfig& config) {
  if (!(state.radial_grid == scheme.radial_grid) || state.m_max != scheme.m_max) {
    throw DomainError("state and scheme use different radial grids or m ranges");
  }
  const RadialToLog to_log(state.radial_grid, sorter_axis(state.radial_grid, config));
  const int n_bins = config.n_u;
  DetectorImage img{state.m_max, n_bins, std::vector<double>(static_cast<std::size_t>(2 * state.m_max + 1) * n_bins, 0.0),
                    state.truncation_loss};
  for (const MixedChannel& c : state.channels) {
    if (std::abs(c.m) > state.m_max) continue;
    LogProfile profile = to_log.apply(c.chi);
    const double captured = profile.weight();
    img.truncation_loss += c.q * (1.0 - captured);
    if (const SchemeChannel* sc = scheme.find(c.m)) {
      profile = phase_flatten(profile, to_log.apply(sc->flatten_target));
    }
    const std::vector<double> spectrum = radial_diffract(profile);
    for (int b = 0; b < n_bins; ++b) img.intensity[img.cell(c.m, b)] = c.q * spectrum[b];
  }
  return img;
}

DetectorImage physical_measurement_distribution(const OamDecomposition& dec, const MeasurementScheme& scheme,
                                                const SorterConfig& config) {
  return physical_measurement_distribution(dephase(dec), scheme, config);
}

OutcomeRegions outcome_regions(const MeasurementScheme& scheme, const SorterConfig& config) {
  const RadialToLog to_log(scheme.radial_grid, sorter_axis(scheme.radial_grid, config));
  const int n_bins = config.n_u;
  const int n_ch = 2 * scheme.m_max + 1;
  OutcomeRegions reg{scheme.m_max, n_bins, std::vector<std::uint8_t>(static_cast<std::size_t>(n_ch) * n_bins, 0),
                     std::vector<int>(n_ch, n_bins)};
  const int centre = n_bins / 2;
  for (int m = -scheme.m_max; m <= scheme.m_max; ++m) {
    const SchemeChannel* sc = scheme.find(m);
    int half = n_bins;  // unlisted channels read out as outcome 0
    if (sc) {
      switch (sc->kind) {
        case ChannelKind::OnlyHypothesis0:
          half = n_bins;
          break;
        case ChannelKind::OnlyHypothesis1:
          half = -1;
          break;
        case ChannelKind::Collinear:
          half = sc->outcome0.empty() ? -1 : n_bins;
          break;
        case ChannelKind::Both: {
          if (sc->outcome1.empty()) {
            half = n_bins;
          } else if (sc->outcome0.empty()) {
            half = -1;
          } else {
            const LogProfile chi0 = to_log.apply(sc->span_basis.front());
            const double w = chi0.weight();
            const std::vector<double> spec = radial_diffract(phase_flatten(chi0, to_log.apply(sc->flatten_target)));
            const double goal = sc->designated_weight * w;
            double acc = 0.0;
            half = -1;
            while (acc < goal && half < n_bins / 2) {
              ++half;
              if (half == 0) {
                acc += spec[centre];
              } else {
                acc += spec[centre - half];
                if (centre + half < n_bins) acc += spec[centre + half];
              }
            }
          }
          break;
        }
      }
    }
    reg.half_width[m + scheme.m_max] = half;
    for (int b = 0; b < n_bins; ++b) {
      const bool zero = half >= n_bins || (half >= 0 && std::abs(b - centre) <= half);
      reg.outcome[reg.cell(m, b)] = zero ? 0 : 1;
    }
  }
  return reg;
}

RegionStats region_statistics(const DetectorImage& image0, const DetectorImage& image1,
                              const OutcomeRegions& regions) {
  if (image0.intensity.size() != regions.outcome.size() || image1.intensity.size() != regions.outcome.size()) {
    throw DomainError("detector images and outcome regions differ in layout");
  }
  double hit0 = 0.0, hit1 = 0.0;
  for (std::size_t i = 0; i < regions.outcome.size(); ++i) {
    if (regions.outcome[i] == 0) {
      hit0 += image0.intensity[i];
    } else {
      hit1 += image1.intensity[i];
    }
  }
  return RegionStats{std::min(1.0, hit0 / image0.total()), std::min(1.0, hit1 / image1.total())};
}

}  // namespace oamdisc
