#include "oamdisc/oam_decomp.hpp"

#include <algorithm>
#include <cmath>

#include "oamdisc/errors.hpp"
#include "oamdisc/fft.hpp"

namespace oamdisc {

RadialGrid::RadialGrid(int n_r, double r_max) : n_r_(n_r), r_max_(r_max) {
  if (n_r < 2) throw DomainError("radial grid needs at least two bins");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw DomainError("r_max must be positive");
}

cplx RadialGrid::inner(std::span<const cplx> u, std::span<const cplx> v) const {
  if (u.size() != static_cast<std::size_t>(n_r_) || v.size() != u.size()) {
    throw DomainError("radial vector length does not match grid");
  }
  cplx s = 0.0;
  for (int j = 0; j < n_r_; ++j) s += std::conj(u[j]) * v[j] * weight(j);
  return s;
}

double RadialGrid::norm2(std::span<const cplx> u) const {
  if (u.size() != static_cast<std::size_t>(n_r_)) throw DomainError("radial vector length does not match grid");
  double s = 0.0;
  for (int j = 0; j < n_r_; ++j) s += std::norm(u[j]) * weight(j);
  return s;
}

double default_r_max(const GridSpec& grid) { return grid.fov() / 2.0 * (1.0 - 2.0 / grid.n()); }

RadialGrid default_radial_grid(const GridSpec& grid) {
  return RadialGrid(kDefaultRadialBins, default_r_max(grid));
}

const OamChannel* OamDecomposition::find(int m) const {
  auto it = std::lower_bound(channels.begin(), channels.end(), m,
                             [](const OamChannel& c, int v) { return c.m < v; });
  return it != channels.end() && it->m == m ? &*it : nullptr;
}

const MixedChannel* MixedState::find(int m) const {
  auto it = std::lower_bound(channels.begin(), channels.end(), m,
                             [](const MixedChannel& c, int v) { return c.m < v; });
  return it != channels.end() && it->m == m ? &*it : nullptr;
}

double AngularSpectrum::total_weight() const {
  double s = 0.0;
  for (int j = 0; j < radial_grid.n_r(); ++j) {
    double ring = 0.0;
    for (int k = 0; k < n_theta; ++k) ring += std::norm(coeffs[static_cast<std::size_t>(j) * n_theta + k]);
    s += ring * radial_grid.weight(j);
  }
  return constants::two_pi * s;
}

int default_angular_samples(int m_max) {
  int n = 256;
  while (n < 8 * m_max) n *= 2;
  return n;
}

namespace {

void check_geometry(const GridSpec& grid, Point2 center, double r_max) {
  const double lo = grid.min_coord();
  const double hi = grid.max_coord();
  if (center.x < lo || center.x > hi || center.y < lo || center.y > hi) {
    throw DomainError("decomposition centre lies outside the field of view");
  }
  const double reach = std::min({center.x - lo, hi - center.x, center.y - lo, hi - center.y});
  if (r_max > reach + 1e-9 * grid.pixel()) {
    throw DomainError("r_max exceeds the distance from the centre to the grid edge");
  }
}

}  // namespace

AngularSpectrum angular_spectrum(const ComplexField& field, Point2 center,
                                 const RadialGrid& radial_grid, int n_theta) {
  check_geometry(field.grid(), center, radial_grid.r_max());
  if (n_theta < 4) throw DomainError("need at least four angular samples");
  AngularSpectrum spec{radial_grid, n_theta, std::vector<cplx>(static_cast<std::size_t>(radial_grid.n_r()) * n_theta)};
  std::vector<double> cos_t(n_theta), sin_t(n_theta);
  for (int l = 0; l < n_theta; ++l) {
    const double t = constants::two_pi * l / n_theta;
    cos_t[l] = std::cos(t);
    sin_t[l] = std::sin(t);
  }
  const double inv_n = 1.0 / n_theta;
  for (int j = 0; j < radial_grid.n_r(); ++j) {
    const double r = radial_grid.r(j);
    std::span<cplx> row(spec.coeffs.data() + static_cast<std::size_t>(j) * n_theta, n_theta);
    for (int l = 0; l < n_theta; ++l) {
      row[l] = field.sample(center.x + r * cos_t[l], center.y + r * sin_t[l]);
    }
    fft::forward(row);
    for (cplx& c : row) c *= inv_n;
  }
  return spec;
}

OamDecomposition oam_decompose(const ComplexField& field, Point2 center, int m_max,
                               const RadialGrid& radial_grid, int n_theta) {
  if (m_max < 0) throw DomainError("m_max must be non-negative");
  if (n_theta == 0) n_theta = default_angular_samples(m_max);
  if (n_theta <= 2 * m_max) throw DomainError("angular sampling too coarse for m_max");
  const AngularSpectrum spec = angular_spectrum(field, center, radial_grid, n_theta);

  const double captured = spec.total_weight();
  const double total = field.norm();
  if (!(captured > 0.0)) throw DomainError("field has no weight inside r_max");

  OamDecomposition dec{radial_grid, m_max, center, {}, 0.0, captured / total, false};
  dec.low_capture = dec.captured_weight < 0.99;

  const double scale = std::sqrt(constants::two_pi / captured);
  const int n_r = radial_grid.n_r();
  double kept = 0.0;
  for (int m = -m_max; m <= m_max; ++m) {
    std::vector<cplx> raw(n_r);
    for (int j = 0; j < n_r; ++j) raw[j] = spec.at(j, m) * scale;
    const double q = radial_grid.norm2(raw);
    if (q < kChannelDropThreshold) continue;
    int ref = 0;
    double best = -1.0;
    for (int j = 0; j < n_r; ++j) {
      const double a = std::abs(raw[j]);
      if (a > best) {
        best = a;
        ref = j;
      }
    }
    double alpha = std::arg(raw[ref]);
    if (alpha <= -constants::pi) alpha = constants::pi;
    const cplx rot = std::polar(1.0 / std::sqrt(q), -alpha);
    for (cplx& v : raw) v *= rot;
    dec.channels.push_back(OamChannel{m, q, alpha, std::move(raw)});
    kept += q;
  }
  dec.truncation_loss = 1.0 - kept;
  return dec;
}

namespace {

// Catmull-Rom interpolation of a radial profile. Nodes below r = 0 are mirrored with the
// parity (-1)^m of an e^{i m theta} field; past the last node the profile is continued linearly.
cplx radial_interp(std::span<const cplx> chi, const RadialGrid& rg, int m, double r) {
  const int n = rg.n_r();
  const double parity = (std::abs(m) % 2 == 0) ? 1.0 : -1.0;
  auto node = [&](int j) -> cplx {
    if (j < 0) return parity * chi[-j - 1];
    if (j >= n) return chi[n - 1] + static_cast<double>(j - n + 1) * (chi[n - 1] - chi[n - 2]);
    return chi[j];
  };
  const double t = r / rg.dr() - 0.5;
  const int j0 = static_cast<int>(std::floor(t));
  const double f = t - j0;
  const cplx p0 = node(j0 - 1), p1 = node(j0), p2 = node(j0 + 1), p3 = node(j0 + 2);
  const double f2 = f * f, f3 = f2 * f;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * f + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * f3);
}

}  // namespace

ComplexField recompose(const OamDecomposition& dec, const GridSpec& grid, Point2 center) {
  check_geometry(grid, center, dec.radial_grid.r_max());
  ComplexField out(grid);
  const double r_max = dec.radial_grid.r_max();
  const double angular_norm = 1.0 / std::sqrt(constants::two_pi);
  for (int iy = 0; iy < grid.n(); ++iy) {
    const double y = grid.coord(iy) - center.y;
    for (int ix = 0; ix < grid.n(); ++ix) {
      const double x = grid.coord(ix) - center.x;
      const double r = std::hypot(x, y);
      if (r > r_max) continue;
      const double theta = std::atan2(y, x);
      cplx v = 0.0;
      for (const OamChannel& c : dec.channels) {
        v += std::sqrt(c.q) * angular_norm * std::polar(1.0, c.alpha + c.m * theta) *
             radial_interp(c.chi, dec.radial_grid, c.m, r);
      }
      out.at(ix, iy) = v;
    }
  }
  return out;
}

cplx state_overlap(const OamDecomposition& dec0, const OamDecomposition& dec1) {
  if (!(dec0.radial_grid == dec1.radial_grid) || dec0.m_max != dec1.m_max) {
    throw DomainError("decompositions use different radial grids or m ranges");
  }
  cplx s = 0.0;
  for (const OamChannel& c0 : dec0.channels) {
    const OamChannel* c1 = dec1.find(c0.m);
    if (!c1) continue;
    s += std::sqrt(c0.q * c1->q) * std::polar(1.0, c1->alpha - c0.alpha) *
         dec0.radial_grid.inner(c0.chi, c1->chi);
  }
  return s;
}

MixedState dephase(const OamDecomposition& dec) {
  MixedState out{dec.radial_grid, dec.m_max, {}, dec.truncation_loss};
  out.channels.reserve(dec.channels.size());
  for (const OamChannel& c : dec.channels) out.channels.push_back(MixedChannel{c.m, c.q, c.chi});
  return out;
}

MixedState dephase(const MixedState& state) { return state; }

}  // namespace oamdisc
