#include "oamdisc/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "oamdisc/errors.hpp"
#include "oamdisc/fft.hpp"

namespace oamdisc {

Priors::Priors(double p0, double p1) : p0_(p0), p1_(p1) {
  if (!(p0 >= 0.0 && p1 >= 0.0) || std::abs(p0 + p1 - 1.0) > 1e-12) {
    throw DomainError("priors must be non-negative and sum to one");
  }
}

const SchemeChannel* MeasurementScheme::find(int m) const {
  auto it = std::lower_bound(channels.begin(), channels.end(), m,
                             [](const SchemeChannel& c, int v) { return c.m < v; });
  return it != channels.end() && it->m == m ? &*it : nullptr;
}

namespace {

constexpr double kCollinearTolerance = 1e-12;

void check_compatible(const RadialGrid& a, int ma, const RadialGrid& b, int mb) {
  if (!(a == b) || ma != mb) throw DomainError("states use different radial grids or m ranges");
}

double captured_total(const MixedState& s) {
  double t = 0.0;
  for (const auto& c : s.channels) t += c.q;
  if (!(t > 0.0)) throw DomainError("state has no captured weight");
  return t;
}

std::vector<int> channel_union(const MixedState& a, const MixedState& b) {
  std::set<int> ms;
  for (const auto& c : a.channels) ms.insert(c.m);
  for (const auto& c : b.channels) ms.insert(c.m);
  return {ms.begin(), ms.end()};
}

std::vector<cplx> combine(cplx a, std::span<const cplx> u, cplx b, std::span<const cplx> v) {
  std::vector<cplx> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = a * u[j] + b * v[j];
  return out;
}

// Eigen-decomposition of the Hermitian matrix [[a, b], [conj(b), d]].
struct Eigen2 {
  double lambda_plus;
  double lambda_minus;
  std::array<cplx, 2> v_plus;   // unit eigenvector of lambda_plus
  std::array<cplx, 2> v_minus;  // orthogonal complement
};

Eigen2 hermitian_eigen_2x2(double a, cplx b, double d) {
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double rad = std::hypot(half, std::abs(b));
  Eigen2 e{mean + rad, mean - rad, {}, {}};
  if (rad == 0.0) {
    e.v_plus = {cplx(1.0), cplx(0.0)};
  } else {
    // Two algebraically equivalent null vectors of (sigma - lambda_plus); take the better conditioned.
    std::array<cplx, 2> x{b, cplx(e.lambda_plus - a)};
    std::array<cplx, 2> y{cplx(e.lambda_plus - d), std::conj(b)};
    const double nx = std::norm(x[0]) + std::norm(x[1]);
    const double ny = std::norm(y[0]) + std::norm(y[1]);
    auto& pick = nx >= ny ? x : y;
    const double s = 1.0 / std::sqrt(std::max(nx, ny));
    e.v_plus = {pick[0] * s, pick[1] * s};
  }
  e.v_minus = {-std::conj(e.v_plus[1]), std::conj(e.v_plus[0])};
  return e;
}

}  // namespace

double helstrom_pure(double overlap_mag, const Priors& priors) {
  if (!(overlap_mag >= 0.0 && overlap_mag <= 1.0 + 1e-12)) {
    throw DomainError("overlap magnitude must lie in [0, 1]");
  }
  const double o = std::min(overlap_mag, 1.0);
  const double arg = 1.0 - 4.0 * priors.p0() * priors.p1() * o * o;
  return 0.5 + 0.5 * std::sqrt(std::max(0.0, arg));
}

double helstrom_mixed(const MixedState& rho0, const MixedState& rho1, const Priors& priors) {
  check_compatible(rho0.radial_grid, rho0.m_max, rho1.radial_grid, rho1.m_max);
  const double w0 = captured_total(rho0);
  const double w1 = captured_total(rho1);
  const double p0 = priors.p0(), p1 = priors.p1();
  double sum = 0.0;
  for (int m : channel_union(rho0, rho1)) {
    const MixedChannel* c0 = rho0.find(m);
    const MixedChannel* c1 = rho1.find(m);
    const double q0 = c0 ? c0->q / w0 : 0.0;
    const double q1 = c1 ? c1->q / w1 : 0.0;
    double ov = (c0 && c1) ? std::abs(rho0.radial_grid.inner(c0->chi, c1->chi)) : 0.0;
    if (1.0 - ov < kCollinearTolerance) ov = 1.0;
    const double d = p0 * q0 - p1 * q1;
    sum += std::sqrt(d * d + 4.0 * p0 * p1 * q0 * q1 * std::max(0.0, (1.0 - ov) * (1.0 + ov)));
  }
  return 0.5 + 0.5 * sum;
}

double helstrom_mixed(const OamDecomposition& dec0, const OamDecomposition& dec1, const Priors& priors) {
  return helstrom_mixed(dephase(dec0), dephase(dec1), priors);
}

MeasurementScheme optimal_scheme(const MixedState& rho0, const MixedState& rho1, const Priors& priors) {
  check_compatible(rho0.radial_grid, rho0.m_max, rho1.radial_grid, rho1.m_max);
  const RadialGrid& rg = rho0.radial_grid;
  const double w0 = captured_total(rho0);
  const double w1 = captured_total(rho1);
  MeasurementScheme scheme{rg, rho0.m_max, {}};

  for (int m : channel_union(rho0, rho1)) {
    const MixedChannel* c0 = rho0.find(m);
    const MixedChannel* c1 = rho1.find(m);
    const double weight0 = c0 ? priors.p0() * c0->q / w0 : 0.0;  // p_0 q_{0,m}
    const double weight1 = c1 ? priors.p1() * c1->q / w1 : 0.0;
    SchemeChannel ch{m, ChannelKind::Both, {}, {}, {}, weight0 >= weight1 ? 0 : 1, {0.0, 0.0}, {}, 0.0};

    if (c0 && !c1) {
      ch.kind = ChannelKind::OnlyHypothesis0;
      ch.span_basis = {c0->chi};
      ch.outcome0 = {c0->chi};
      ch.complement_outcome = 0;
      ch.eigenvalues = {weight0, 0.0};
      ch.flatten_target = c0->chi;
      ch.designated_weight = 1.0;
    } else if (c1 && !c0) {
      ch.kind = ChannelKind::OnlyHypothesis1;
      ch.span_basis = {c1->chi};
      ch.outcome1 = {c1->chi};
      ch.complement_outcome = 1;
      ch.eigenvalues = {0.0, -weight1};
      ch.flatten_target = c1->chi;
      ch.designated_weight = 0.0;
    } else {
      const cplx ov = rg.inner(c0->chi, c1->chi);
      if (std::abs(1.0 - std::abs(ov)) < kCollinearTolerance) {
        ch.kind = ChannelKind::Collinear;
        const double lambda = weight0 - weight1;
        ch.span_basis = {c0->chi};
        if (lambda >= 0.0) {
          ch.outcome0 = {c0->chi};
          ch.designated_weight = 1.0;
        } else {
          ch.outcome1 = {c0->chi};
        }
        ch.eigenvalues = {lambda, 0.0};
        ch.flatten_target = c0->chi;
      } else {
        // Orthonormal basis {chi0, b2} of the span; chi1 = ov * chi0 + s * b2 with s > 0.
        std::vector<cplx> residual = combine(1.0, c1->chi, -ov, c0->chi);
        const double s = std::sqrt(rg.norm2(residual));
        for (cplx& v : residual) v /= s;
        // sigma_m = p0 q0 |chi0><chi0| - p1 q1 |chi1><chi1| in that basis.
        const double a = weight0 - weight1 * std::norm(ov);
        const cplx b = -weight1 * ov * s;
        const double d = -weight1 * s * s;
        const Eigen2 eig = hermitian_eigen_2x2(a, b, d);
        auto plus = combine(eig.v_plus[0], c0->chi, eig.v_plus[1], residual);
        auto minus = combine(eig.v_minus[0], c0->chi, eig.v_minus[1], residual);
        ch.span_basis = {c0->chi, residual};
        ch.eigenvalues = {eig.lambda_plus, eig.lambda_minus};
        (eig.lambda_plus >= 0.0 ? ch.outcome0 : ch.outcome1).push_back(plus);
        (eig.lambda_minus >= 0.0 ? ch.outcome0 : ch.outcome1).push_back(minus);
        ch.flatten_target = ch.outcome0.empty() ? c0->chi : ch.outcome0.front();
        for (const auto& v : ch.outcome0) ch.designated_weight += std::norm(rg.inner(v, c0->chi));
      }
    }
    scheme.channels.push_back(std::move(ch));
  }
  return scheme;
}

MeasurementScheme optimal_scheme(const OamDecomposition& dec0, const OamDecomposition& dec1,
                                 const Priors& priors) {
  return optimal_scheme(dephase(dec0), dephase(dec1), priors);
}

std::vector<cplx> outcome_operator_matrix(const SchemeChannel& channel, const RadialGrid& grid, int outcome) {
  const int n = grid.n_r();
  std::vector<cplx> mat(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> sw(n);
  for (int j = 0; j < n; ++j) sw[j] = std::sqrt(grid.weight(j));
  auto add_rank_one = [&](const std::vector<cplx>& v, double sign) {
    for (int i = 0; i < n; ++i) {
      const cplx vi = v[i] * sw[i];
      for (int j = 0; j < n; ++j) mat[static_cast<std::size_t>(i) * n + j] += sign * vi * std::conj(v[j] * sw[j]);
    }
  };
  for (const auto& v : outcome == 0 ? channel.outcome0 : channel.outcome1) add_rank_one(v, 1.0);
  if (channel.complement_outcome == outcome) {
    for (int i = 0; i < n; ++i) mat[static_cast<std::size_t>(i) * n + i] += 1.0;
    for (const auto& v : channel.span_basis) add_rank_one(v, -1.0);
  }
  return mat;
}

SuccessStats scheme_probability(const MeasurementScheme& scheme, const MixedState& rho0,
                                const MixedState& rho1, const Priors& priors) {
  check_compatible(rho0.radial_grid, rho0.m_max, rho1.radial_grid, rho1.m_max);
  check_compatible(scheme.radial_grid, scheme.m_max, rho0.radial_grid, rho0.m_max);
  const RadialGrid& rg = scheme.radial_grid;
  const std::array<double, 2> total{captured_total(rho0), captured_total(rho1)};
  const std::array<const MixedState*, 2> states{&rho0, &rho1};

  SuccessStats out{0.0, 0.0, 0.0};
  for (int m : channel_union(rho0, rho1)) {
    const SchemeChannel* ch = scheme.find(m);
    // pr[o][k] = Pr(outcome o, channel m | hypothesis k)
    std::array<std::array<double, 2>, 2> pr{};
    for (int k = 0; k < 2; ++k) {
      const MixedChannel* c = states[k]->find(m);
      if (!c) continue;
      const double q = c->q / total[k];
      if (!ch) {
        pr[0][k] = q;
        continue;
      }
      double in_span = 0.0;
      for (const auto& v : ch->span_basis) in_span += std::norm(rg.inner(v, c->chi));
      const double outside = std::max(0.0, 1.0 - in_span);
      for (int o = 0; o < 2; ++o) {
        double f = 0.0;
        for (const auto& v : o == 0 ? ch->outcome0 : ch->outcome1) f += std::norm(rg.inner(v, c->chi));
        if (ch->complement_outcome == o) f += outside;
        pr[o][k] = q * f;
      }
    }
    for (int o = 0; o < 2; ++o) {
      const double a0 = priors.p0() * pr[o][0];
      const double a1 = priors.p1() * pr[o][1];
      if (a0 >= a1) {
        out.p += a0;
        out.s0 += pr[o][0];
      } else {
        out.p += a1;
        out.s1 += pr[o][1];
      }
    }
  }
  out.s0 = std::clamp(out.s0, 0.0, 1.0);
  out.s1 = std::clamp(out.s1, 0.0, 1.0);
  out.p = std::min(out.p, 1.0);
  return out;
}

SuccessStats scheme_probability(const MeasurementScheme& scheme, const OamDecomposition& dec0,
                                const OamDecomposition& dec1, const Priors& priors) {
  return scheme_probability(scheme, dephase(dec0), dephase(dec1), priors);
}

double overlap_magnitude(const OamDecomposition& dec0, const OamDecomposition& dec1) {
  double w0 = 0.0, w1 = 0.0;
  for (const auto& c : dec0.channels) w0 += c.q;
  for (const auto& c : dec1.channels) w1 += c.q;
  if (!(w0 > 0.0 && w1 > 0.0)) throw DomainError("state has no captured weight");
  return std::min(1.0, std::abs(state_overlap(dec0, dec1)) / std::sqrt(w0 * w1));
}

std::vector<double> real_space_intensity(const ComplexField& field, bool zernike) {
  const GridSpec& g = field.grid();
  std::vector<cplx> work(field.values().begin(), field.values().end());
  if (zernike) {
    fft::forward_2d(work, g.n());
    work[0] *= cplx(0.0, 1.0);
    fft::inverse_2d(work, g.n());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (cplx& v : work) v *= inv;
  }
  std::vector<double> out(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) out[i] = std::norm(work[i]) * g.pixel_area();
  return out;
}

std::vector<double> real_space_intensity_mixed(const ComplexField& field, Point2 center,
                                               const RadialGrid& radial_grid, bool zernike, int n_theta) {
  const GridSpec& g = field.grid();
  if (n_theta == 0) n_theta = default_angular_samples(kDefaultMMax);
  const AngularSpectrum spec = angular_spectrum(field, center, radial_grid, n_theta);

  // Ideal Zernike plate: psi -> psi + shift with shift = (i - 1) * mean(psi).
  cplx shift = 0.0;
  if (zernike) {
    cplx sum = 0.0;
    for (const cplx& v : field.values()) sum += v;
    shift = cplx(-1.0, 1.0) * sum / static_cast<double>(g.size());
  }

  const int n_r = radial_grid.n_r();
  std::vector<double> ring(n_r);   // angular mean of |psi|^2
  std::vector<cplx> zeroth(n_r);   // m = 0 component
  for (int j = 0; j < n_r; ++j) {
    double s = 0.0;
    for (int k = 0; k < n_theta; ++k) s += std::norm(spec.coeffs[static_cast<std::size_t>(j) * n_theta + k]);
    ring[j] = s;
    zeroth[j] = spec.at(j, 0);
  }

  const double r_max = radial_grid.r_max();
  std::vector<double> out(g.size());
  for (int iy = 0; iy < g.n(); ++iy) {
    const double y = g.coord(iy) - center.y;
    for (int ix = 0; ix < g.n(); ++ix) {
      const double x = g.coord(ix) - center.x;
      const double r = std::hypot(x, y);
      const std::size_t idx = g.index(ix, iy);
      double intensity;
      if (r <= r_max) {
        const double t = std::clamp(r / radial_grid.dr() - 0.5, 0.0, static_cast<double>(n_r - 1));
        const int j0 = std::min(static_cast<int>(t), n_r - 2);
        const double f = t - j0;
        const double s = (1.0 - f) * ring[j0] + f * ring[j0 + 1];
        const cplx c0 = (1.0 - f) * zeroth[j0] + f * zeroth[j0 + 1];
        intensity = s + std::norm(c0 + shift) - std::norm(c0);
      } else {
        intensity = std::norm(field.values()[idx] + shift);
      }
      out[idx] = std::max(0.0, intensity) * g.pixel_area();
    }
  }
  return out;
}

SuccessStats detector_success(std::span<const double> prob0, std::span<const double> prob1,
                              const Priors& priors) {
  if (prob0.size() != prob1.size()) throw DomainError("detector distributions differ in size");
  SuccessStats out{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < prob0.size(); ++i) {
    const double a0 = priors.p0() * prob0[i];
    const double a1 = priors.p1() * prob1[i];
    if (a0 >= a1) {
      out.p += a0;
      out.s0 += prob0[i];
    } else {
      out.p += a1;
      out.s1 += prob1[i];
    }
  }
  out.s0 = std::clamp(out.s0, 0.0, 1.0);
  out.s1 = std::clamp(out.s1, 0.0, 1.0);
  out.p = std::min(out.p, 1.0);
  return out;
}

SuccessStats real_space_probability(const ComplexField& field0, const ComplexField& field1,
                                    const Priors& priors, bool zernike) {
  if (!(field0.grid() == field1.grid())) throw DomainError("fields use different grids");
  return detector_success(real_space_intensity(field0, zernike), real_space_intensity(field1, zernike), priors);
}

SuccessStats real_space_probability_mixed(const ComplexField& field0, const ComplexField& field1,
                                          Point2 center, const RadialGrid& radial_grid,
                                          const Priors& priors, bool zernike, int n_theta) {
  if (!(field0.grid() == field1.grid())) throw DomainError("fields use different grids");
  return detector_success(real_space_intensity_mixed(field0, center, radial_grid, zernike, n_theta),
                          real_space_intensity_mixed(field1, center, radial_grid, zernike, n_theta), priors);
}

namespace {

// k * log(p) with the convention 0 * log(0) = 0.
double xlogy(double k, double p) {
  if (k == 0.0) return 0.0;
  return k * std::log(p);
}

}  // namespace

double n_electron_probability(double s0, double s1, const Priors& priors, long long n) {
  if (!(s0 >= 0.0 && s0 <= 1.0 && s1 >= 0.0 && s1 <= 1.0)) throw DomainError("s0, s1 must lie in [0, 1]");
  if (n < 1) throw DomainError("N must be at least 1");
  const double ln_p0 = priors.p0() > 0.0 ? std::log(priors.p0()) : -std::numeric_limits<double>::infinity();
  const double ln_p1 = priors.p1() > 0.0 ? std::log(priors.p1()) : -std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  const double lg_n = std::lgamma(nn + 1.0);
  // Outside mean +- 40 sd both binomial terms are below exp(-800) (Hoeffding).
  const double spread = 40.0 * std::sqrt(0.25 * nn) + 1.0;
  const double mean_a = nn * s0;
  const double mean_b = nn * (1.0 - s1);
  const long long k_lo = std::max(0LL, static_cast<long long>(std::floor(std::min(mean_a, mean_b) - spread)));
  const long long k_hi = std::min(n, static_cast<long long>(std::ceil(std::max(mean_a, mean_b) + spread)));
  double total = 0.0;
  for (long long k = k_lo; k <= k_hi; ++k) {
    const double kk = static_cast<double>(k);
    const double lc = lg_n - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
    const double t0 = ln_p0 + lc + xlogy(kk, s0) + xlogy(nn - kk, 1.0 - s0);
    const double t1 = ln_p1 + lc + xlogy(kk, 1.0 - s1) + xlogy(nn - kk, s1);
    total += std::exp(std::max(t0, t1));
  }
  return std::min(total, 1.0);
}

long long n_min(double s0, double s1, const Priors& priors, double x) {
  if (!(x > 0.5 && x < 1.0)) throw DomainError("threshold must lie in (0.5, 1)");
  if (!(s0 >= 0.0 && s0 <= 1.0 && s1 >= 0.0 && s1 <= 1.0)) throw DomainError("s0, s1 must lie in [0, 1]");
  if (std::abs(s0 + s1 - 1.0) <= 1e-12) {
    throw UnreachableThreshold("per-electron statistics are identical under both hypotheses");
  }
  auto prob = [&](long long n) { return n_electron_probability(s0, s1, priors, n); };
  if (prob(1) >= x) return 1;
  long long lo = 1, hi = 2;
  while (prob(hi) < x) {
    lo = hi;
    hi *= 2;
    if (hi > kMaxElectrons) throw UnreachableThreshold("threshold needs more than 2^26 electrons");
  }
  // P(N) is nondecreasing: invariant P(lo) < x <= P(hi).
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    (prob(mid) >= x ? hi : lo) = mid;
  }
  return hi;
}

std::optional<long long> try_n_min(double s0, double s1, const Priors& priors, double x) {
  try {
    return n_min(s0, s1, priors, x);
  } catch (const UnreachableThreshold&) {
    return std::nullopt;
  }
}

}  // namespace oamdisc
