#include "oamdisc/discrimination.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oamdisc/errors.hpp"
#include "test_support.hpp"

using namespace oamdisc;
using oamdisc::testing::random_profile;
using oamdisc::testing::random_state_pair;
using oamdisc::testing::trace_norm_oracle;

namespace {

const GridSpec kGrid(512, 180.0);
const Point2 kOrigin{0.0, 0.0};

ComplexField phantom_field(const PhantomParams& p, const GridSpec& g = kGrid) {
  return interact(plane_wave(g), make_phantom(g, p), electron_params(300.0));
}

PhantomParams loose7() {
  PhantomParams p;
  p.packing = 0.5;
  return p;
}

PhantomParams tight7() { return PhantomParams{}; }

MixedState single_channel(const RadialGrid& rg, int m, std::vector<cplx> chi, double q = 1.0) {
  return MixedState{rg, 4, {{m, q, std::move(chi)}}, 1.0 - q};
}

}  // namespace

TEST(priors, Validation) {
  EXPECT_THROW(Priors(0.6, 0.6), DomainError);
  EXPECT_THROW(Priors(-0.1, 1.1), DomainError);
  EXPECT_NO_THROW(Priors(0.3, 0.7));
  EXPECT_EQ(Priors(0.3, 0.7).max(), 0.7);
  EXPECT_EQ(Priors(0.3, 0.7).swapped().p0(), 0.7);
}

TEST(helstrom_pure, LimitingCases) {
  EXPECT_DOUBLE_EQ(helstrom_pure(0.0, Priors::equal()), 1.0);
  EXPECT_NEAR(helstrom_pure(1.0, Priors(0.3, 0.7)), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(helstrom_pure(1.0, Priors::equal()), 0.5);
  EXPECT_THROW(helstrom_pure(1.1, Priors::equal()), DomainError);
}

TEST(helstrom_pure, ReferenceOverlaps) {
  // 1/2 + 1/2 sqrt(1 - 0.987^2) = 0.58043.
  EXPECT_NEAR(helstrom_pure(0.987, Priors::equal()), 0.5804, 1e-4);
  EXPECT_NEAR(helstrom_pure(0.987, Priors::equal()), 0.582, 3e-3);
}

TEST(helstrom_mixed, SingleChannelReducesToPure) {
  std::mt19937_64 rng(7);
  const RadialGrid rg(16, 5.0);
  const auto a = random_profile(rng, rg);
  const auto b = oamdisc::testing::tilted_profile(rng, rg, a, 0.4);
  const double ov = std::abs(rg.inner(a, b));
  const Priors pr(0.35, 0.65);
  EXPECT_NEAR(helstrom_mixed(single_channel(rg, 2, a), single_channel(rg, 2, b), pr), helstrom_pure(ov, pr), 1e-12);
}

TEST(helstrom_mixed, IdenticalStatesGiveHalf) {
  std::mt19937_64 rng(3);
  const auto pair = random_state_pair(rng, 5);
  EXPECT_NEAR(helstrom_mixed(pair.rho0, pair.rho0, Priors::equal()), 0.5, 1e-12);
}

TEST(helstrom_mixed, MatchesTraceNormOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pair = random_state_pair(rng, 3);
    EXPECT_NEAR(helstrom_mixed(pair.rho0, pair.rho1, pair.priors), trace_norm_oracle(pair.rho0, pair.rho1, pair.priors),
                1e-9);
  }
}

TEST(helstrom_mixed, AbsentChannelContributesItsWeight) {
  const RadialGrid rg(8, 4.0);
  std::mt19937_64 rng(5);
  const auto a = random_profile(rng, rg);
  const MixedState r0 = single_channel(rg, 1, a);
  const MixedState r1 = single_channel(rg, 2, a);
  EXPECT_NEAR(helstrom_mixed(r0, r1, Priors(0.2, 0.8)), 1.0, 1e-15);
  EXPECT_THROW(helstrom_mixed(r0, single_channel(RadialGrid(9, 4.0), 1, std::vector<cplx>(9, 1.0)), Priors::equal()),
               DomainError);
}

TEST(optimal_scheme, OrthogonalProfilesSeparate) {
  const RadialGrid rg(4, 2.0);
  std::vector<cplx> a(4, 0.0), b(4, 0.0);
  a[0] = 1.0 / std::sqrt(rg.weight(0));
  b[2] = 1.0 / std::sqrt(rg.weight(2));
  const MeasurementScheme s = optimal_scheme(single_channel(rg, 0, a, 0.6), single_channel(rg, 0, b, 0.6), Priors::equal());
  ASSERT_EQ(s.channels.size(), 1u);
  const SchemeChannel& c = s.channels[0];
  EXPECT_EQ(c.kind, ChannelKind::Both);
  ASSERT_EQ(c.outcome0.size(), 1u);
  ASSERT_EQ(c.outcome1.size(), 1u);
  EXPECT_NEAR(std::abs(rg.inner(c.outcome0[0], a)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(rg.inner(c.outcome1[0], b)), 1.0, 1e-12);
  const SuccessStats st = scheme_probability(s, single_channel(rg, 0, a, 0.6), single_channel(rg, 0, b, 0.6), Priors::equal());
  EXPECT_NEAR(st.p, 1.0, 1e-12);
}

TEST(optimal_scheme, CollinearProfilesGoToLargerWeight) {
  const RadialGrid rg(6, 2.0);
  std::mt19937_64 rng(2);
  const auto a = random_profile(rng, rg);
  std::vector<cplx> phased(a);
  for (cplx& v : phased) v *= std::polar(1.0, 0.8);
  const MixedState r0{rg, 4, {{1, 0.7, a}, {2, 0.3, random_profile(rng, rg)}}, 0.0};
  const MixedState r1{rg, 4, {{1, 0.4, phased}, {3, 0.6, random_profile(rng, rg)}}, 0.0};
  const MeasurementScheme s = optimal_scheme(r0, r1, Priors::equal());
  const SchemeChannel* c = s.find(1);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->kind, ChannelKind::Collinear);
  EXPECT_EQ(c->outcome0.size(), 1u);
  EXPECT_TRUE(c->outcome1.empty());
  EXPECT_NEAR(c->eigenvalues[0], 0.5 * (0.7 - 0.4), 1e-12);
  EXPECT_EQ(s.find(2)->kind, ChannelKind::OnlyHypothesis0);
  EXPECT_EQ(s.find(3)->kind, ChannelKind::OnlyHypothesis1);
  EXPECT_NEAR(scheme_probability(s, r0, r1, Priors::equal()).p, helstrom_mixed(r0, r1, Priors::equal()), 1e-12);
}

TEST(optimal_scheme, OutcomeOperatorsFormAProjectiveMeasurement) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const auto pair = random_state_pair(rng, 4, 10);
    const MeasurementScheme s = optimal_scheme(pair.rho0, pair.rho1, pair.priors);
    const int n = s.radial_grid.n_r();
    for (const SchemeChannel& c : s.channels) {
      const auto e0 = outcome_operator_matrix(c, s.radial_grid, 0);
      const auto e1 = outcome_operator_matrix(c, s.radial_grid, 1);
      Eigen::MatrixXcd a(n, n), b(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          a(i, j) = e0[static_cast<std::size_t>(i) * n + j];
          b(i, j) = e1[static_cast<std::size_t>(i) * n + j];
        }
      }
      EXPECT_LT((a - a.adjoint()).norm(), 1e-9);
      EXPECT_LT((a + b - Eigen::MatrixXcd::Identity(n, n)).norm(), 1e-9);
      EXPECT_LT((a * a - a).norm(), 1e-9);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
      EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
    }
  }
}

TEST(scheme_probability, OptimalSchemeAttainsBound) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pair = random_state_pair(rng, 2 + trial % 7);
    const MeasurementScheme s = optimal_scheme(pair.rho0, pair.rho1, pair.priors);
    const SuccessStats st = scheme_probability(s, pair.rho0, pair.rho1, pair.priors);
    EXPECT_NEAR(st.p, helstrom_mixed(pair.rho0, pair.rho1, pair.priors), 1e-9);
    EXPECT_NEAR(st.p, pair.priors.p0() * st.s0 + pair.priors.p1() * st.s1, 1e-12);
  }
}

TEST(scheme_probability, UninformativeMeasurement) {
  // Identical channel weights: a measurement that always answers 0 achieves max(p0, p1).
  std::mt19937_64 rng(29);
  const RadialGrid rg(8, 3.0);
  MixedState r0{rg, 4, {}, 0.0}, r1{rg, 4, {}, 0.0};
  for (int m = -2; m <= 2; ++m) {
    r0.channels.push_back({m, 0.2, random_profile(rng, rg)});
    r1.channels.push_back({m, 0.2, random_profile(rng, rg)});
  }
  MeasurementScheme all0{rg, 4, {}};
  for (int m = -2; m <= 2; ++m) {
    SchemeChannel c{m, ChannelKind::OnlyHypothesis0, {}, {}, {}, 0, {0.0, 0.0}, r0.find(m)->chi, 1.0};
    all0.channels.push_back(c);
  }
  for (const Priors pr : {Priors::equal(), Priors(0.3, 0.7), Priors(0.8, 0.2)}) {
    EXPECT_NEAR(scheme_probability(all0, r0, r1, pr).p, pr.max(), 1e-12);
    EXPECT_NEAR(scheme_probability(MeasurementScheme{rg, 4, {}}, r0, r1, pr).p, pr.max(), 1e-12);
  }
}

TEST(scheme_probability, PriorSwapInvariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pair = random_state_pair(rng, 5);
    const double a = helstrom_mixed(pair.rho0, pair.rho1, pair.priors);
    const double b = helstrom_mixed(pair.rho1, pair.rho0, pair.priors.swapped());
    EXPECT_NEAR(a, b, 1e-12);
    const auto s1 = optimal_scheme(pair.rho1, pair.rho0, pair.priors.swapped());
    EXPECT_NEAR(scheme_probability(s1, pair.rho1, pair.rho0, pair.priors.swapped()).p, a, 1e-9);
  }
}

TEST(scheme_probability, PhantomPairIsPhaseInsensitive) {
  const RadialGrid rg = default_radial_grid(kGrid);
  const OamDecomposition d0 = oam_decompose(phantom_field(loose7()), kOrigin, kDefaultMMax, rg);
  const OamDecomposition d1 = oam_decompose(phantom_field(tight7()), kOrigin, kDefaultMMax, rg);
  const Priors pr = Priors::equal();
  const MeasurementScheme s = optimal_scheme(d0, d1, pr);
  const SuccessStats a = scheme_probability(s, d0, d1, pr);
  const SuccessStats b = scheme_probability(s, dephase(d0), dephase(d1), pr);
  EXPECT_EQ(a.p, b.p);
  EXPECT_NEAR(a.p, helstrom_mixed(d0, d1, pr), 1e-9);
  const double overlap = overlap_magnitude(d0, d1);
  EXPECT_LE(helstrom_mixed(d0, d1, pr), helstrom_pure(overlap, pr) + 1e-12);
}

TEST(real_space, ZernikeFilterClosedForm) {
  const GridSpec g(64, 40.0);
  ComplexField f(g);
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n;
  for (cplx& v : f.values()) v = cplx(1.0 + 0.1 * n(rng), 0.1 * n(rng));
  f.normalize();
  cplx mean = 0.0;
  for (const cplx& v : f.values()) mean += v;
  mean /= static_cast<double>(g.size());
  const auto with = real_space_intensity(f, true);
  const auto without = real_space_intensity(f, false);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx expected = f.values()[i] + cplx(-1.0, 1.0) * mean;
    EXPECT_NEAR(with[i], std::norm(expected) * g.pixel_area(), 1e-14);
    EXPECT_NEAR(without[i], std::norm(f.values()[i]) * g.pixel_area(), 1e-16);
    total += with[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(real_space, IdenticalAndDisjointFields) {
  const GridSpec g(64, 40.0);
  const ComplexField f = phantom_field(PhantomParams{1, 8.0, 3.0, 0.5, 380.0, 0.0}, g);
  EXPECT_NEAR(real_space_probability(f, f, Priors::equal(), true).p, 0.5, 1e-12);
  ComplexField a(g), b(g);
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) (ix < 32 ? a : b).at(ix, iy) = 1.0;
  }
  a.normalize();
  b.normalize();
  EXPECT_NEAR(real_space_probability(a, b, Priors::equal(), false).p, 1.0, 1e-12);
  EXPECT_THROW(real_space_probability(a, plane_wave(GridSpec(32, 40.0)), Priors::equal(), true), DomainError);
}

TEST(real_space, MixedIntensityEqualsRotationAverage) {
  PhantomParams p = loose7();
  p.n_fold = 3;
  const RadialGrid rg = default_radial_grid(kGrid);
  const auto mixed = real_space_intensity_mixed(phantom_field(p), kOrigin, rg, true);
  constexpr int kRotations = 64;
  std::vector<double> avg(kGrid.size(), 0.0);
  for (int k = 0; k < kRotations; ++k) {
    PhantomParams q = p;
    q.orientation = constants::two_pi * k / kRotations;
    const auto i = real_space_intensity(phantom_field(q), true);
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += i[j] / kRotations;
  }
  double l1 = 0.0;
  for (std::size_t j = 0; j < avg.size(); ++j) l1 += std::abs(avg[j] - mixed[j]);
  EXPECT_LT(l1, 2e-3);

  const PhantomParams other = tight7();
  const auto mixed1 = real_space_intensity_mixed(phantom_field(other), kOrigin, rg, true);
  std::vector<double> avg1(kGrid.size(), 0.0);
  for (int k = 0; k < kRotations; ++k) {
    PhantomParams q = other;
    q.orientation = constants::two_pi * k / kRotations;
    const auto i = real_space_intensity(phantom_field(q), true);
    for (std::size_t j = 0; j < avg1.size(); ++j) avg1[j] += i[j] / kRotations;
  }
  EXPECT_NEAR(detector_success(mixed, mixed1, Priors::equal()).p, detector_success(avg, avg1, Priors::equal()).p, 2e-3);
}

TEST(real_space, OrderingOnPhantomPair) {
  const RadialGrid rg = default_radial_grid(kGrid);
  const ComplexField f0 = phantom_field(loose7());
  const ComplexField f1 = phantom_field(tight7());
  const Priors pr = Priors::equal();
  const double rs = real_space_probability_mixed(f0, f1, kOrigin, rg, pr, true).p;
  const OamDecomposition d0 = oam_decompose(f0, kOrigin, kDefaultMMax, rg);
  const OamDecomposition d1 = oam_decompose(f1, kOrigin, kDefaultMMax, rg);
  EXPECT_GE(rs, 0.5);
  EXPECT_LE(rs, helstrom_mixed(d0, d1, pr));
}

TEST(n_electron_probability, SingleShotReduction) {
  const Priors pr(0.4, 0.6);
  for (auto [s0, s1] : {std::pair{0.7, 0.55}, std::pair{0.2, 0.9}, std::pair{0.5, 0.5}}) {
    const double expected = std::max(pr.p0() * s0, pr.p1() * (1 - s1)) + std::max(pr.p0() * (1 - s0), pr.p1() * s1);
    EXPECT_NEAR(n_electron_probability(s0, s1, pr, 1), expected, 1e-14);
  }
}

TEST(n_electron_probability, KnownValues) {
  // n0 = 0..3 terms: max(.008,.216) + max(.096,.432) + max(.384,.288) + max(.512,.064), halved.
  EXPECT_NEAR(n_electron_probability(0.8, 0.6, Priors::equal(), 3), 0.772, 1e-12);
  for (long long n : {1LL, 5LL, 1000LL}) EXPECT_NEAR(n_electron_probability(1.0, 1.0, Priors::equal(), n), 1.0, 1e-12);
  EXPECT_THROW(n_electron_probability(1.2, 0.5, Priors::equal(), 3), DomainError);
  EXPECT_THROW(n_electron_probability(0.6, 0.5, Priors::equal(), 0), DomainError);
}

TEST(n_electron_probability, NondecreasingInN) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const double s0 = u(rng), s1 = u(rng);
    const double p0 = 0.2 + 0.6 * u(rng);
    const Priors priors(p0, 1.0 - p0);
    double prev = 0.0;
    for (long long n = 1; n <= 200; ++n) {
      const double p = n_electron_probability(s0, s1, priors, n);
      EXPECT_GE(p, prev - 1e-12);
      prev = p;
    }
  }
}

TEST(n_min, SymmetricStatistics) {
  const long long n90 = n_min(0.564, 0.564, Priors::equal(), 0.9);
  const long long n99 = n_min(0.564, 0.564, Priors::equal(), 0.99);
  EXPECT_NEAR(static_cast<double>(n90), 98.0, 9.8);
  EXPECT_NEAR(static_cast<double>(n99), 323.0, 32.3);
  EXPECT_GE(n_electron_probability(0.564, 0.564, Priors::equal(), n90), 0.9);
  EXPECT_LT(n_electron_probability(0.564, 0.564, Priors::equal(), n90 - 1), 0.9);
}

TEST(n_min, PerfectAndUninformative) {
  EXPECT_EQ(n_min(1.0, 1.0, Priors::equal(), 0.999), 1);
  EXPECT_THROW(n_min(0.5, 0.5, Priors::equal(), 0.9), UnreachableThreshold);
  EXPECT_THROW(n_min(0.3, 0.7, Priors(0.2, 0.8), 0.9), UnreachableThreshold);
  EXPECT_FALSE(try_n_min(0.5, 0.5, Priors::equal(), 0.9).has_value());
  EXPECT_THROW(n_min(0.6, 0.6, Priors::equal(), 1.0), DomainError);
  EXPECT_THROW(n_min(0.6, 0.6, Priors::equal(), 0.5), DomainError);
}

TEST(n_min, InformativeBelowPriorStillConverges) {
  // Single-shot ML probability equals max prior here, yet repeated shots are informative.
  const Priors pr(0.9, 0.1);
  EXPECT_NEAR(n_electron_probability(0.6, 0.6, pr, 1), 0.9, 1e-12);
  const long long n = n_min(0.6, 0.6, pr, 0.95);
  EXPECT_GT(n, 1);
  EXPECT_GE(n_electron_probability(0.6, 0.6, pr, n), 0.95);
}

TEST(n_min, NonincreasingInStatistics) {
  long long prev = n_min(0.52, 0.55, Priors::equal(), 0.9);
  for (double s0 = 0.53; s0 < 0.7; s0 += 0.01) {
    const long long n = n_min(s0, 0.55, Priors::equal(), 0.9);
    EXPECT_LE(n, prev);
    prev = n;
  }
  prev = n_min(0.55, 0.52, Priors::equal(), 0.99);
  for (double s1 = 0.53; s1 < 0.7; s1 += 0.01) {
    const long long n = n_min(0.55, s1, Priors::equal(), 0.99);
    EXPECT_LE(n, prev);
    prev = n;
  }
}
