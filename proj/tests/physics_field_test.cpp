#include "oamdisc/physics_field.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "oamdisc/errors.hpp"
#include "oamdisc/oam_decomp.hpp"
#include "oamdisc/discrimination.hpp"

using namespace oamdisc;

namespace {

GridSpec small_grid() { return GridSpec(128, 90.0); }

PhantomParams small_phantom(int n_fold) {
  PhantomParams p;
  p.n_fold = n_fold;
  p.ring_radius = 20.0;
  p.blob_sigma = 4.0;
  p.packing = 0.5;
  return p;
}

}  // namespace

TEST(grid_spec, RejectsBadSides) {
  EXPECT_THROW(GridSpec(500, 180.0), DomainError);
  EXPECT_THROW(GridSpec(8, 180.0), DomainError);
  EXPECT_THROW(GridSpec(64, 0.0), DomainError);
  EXPECT_NO_THROW(GridSpec(16, 1.0));
}

TEST(grid_spec, OriginAtCentrePixel) {
  GridSpec g(512, 180.0);
  EXPECT_EQ(g.coord(256), 0.0);
  EXPECT_DOUBLE_EQ(g.pixel(), 180.0 / 512);
  EXPECT_DOUBLE_EQ(g.area(), 32400.0);
}

TEST(complex_field, NormalizeGivesUnitNorm) {
  ComplexField f(small_grid());
  for (int iy = 0; iy < 128; ++iy) {
    for (int ix = 0; ix < 128; ++ix) f.at(ix, iy) = cplx(std::sin(0.1 * ix) + 2.0, 0.3 * iy);
  }
  f.normalize();
  EXPECT_NEAR(f.norm(), 1.0, 1e-12);
  EXPECT_NEAR(plane_wave(small_grid()).norm(), 1.0, 1e-12);
}

TEST(complex_field, BilinearSampleHitsNodesAndInterpolatesLinearly) {
  GridSpec g = small_grid();
  ComplexField f(g);
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) f.at(ix, iy) = cplx(2.0 * g.coord(ix) - g.coord(iy), g.coord(iy));
  }
  EXPECT_NEAR(std::abs(f.sample(g.coord(70), g.coord(40)) - f.at(70, 40)), 0.0, 1e-12);
  const double x = 3.3, y = -7.9;
  EXPECT_NEAR(std::abs(f.sample(x, y) - cplx(2.0 * x - y, y)), 0.0, 1e-12);
}

// Closed-form oracle: lambda[A] = hc / sqrt(E (E + 2 m c^2)) with hc = 12.398419843320026 keV A and
// m c^2 = 510.99895 keV; sigma = 2 pi / (lambda U) (m c^2 + eU) / (2 m c^2 + eU).
TEST(electron_params, WavelengthAndInteractionConstant) {
  const ElectronParams p300 = electron_params(300.0);
  EXPECT_NEAR(p300.lambda, 0.01968748900679167, 1e-10);
  EXPECT_NEAR(p300.sigma, 0.0006526161421733561, 1e-11);
  EXPECT_NEAR(p300.gamma, 1.0 + 300.0 / 510.99895, 1e-9);
  const ElectronParams p100 = electron_params(100.0);
  EXPECT_NEAR(p100.lambda, 0.03701436613769157, 1e-10);
  EXPECT_NEAR(p100.sigma, 0.0009243958170633803, 1e-11);
  EXPECT_NEAR(electron_params(200.0).lambda, 0.02507934045046928, 1e-10);
}

TEST(electron_params, SigmaMatchesDefinition) {
  for (double kv : {1.0, 60.0, 300.0, 3000.0}) {
    const ElectronParams p = electron_params(kv);
    using namespace constants;
    const double expected =
        two_pi * electron_mass * p.gamma * elementary_charge * (p.lambda * 1e-10) / (planck * planck) * 1e-10;
    EXPECT_NEAR(p.sigma / expected, 1.0, 1e-12);
    EXPECT_GT(p.lambda, 0.0);
    EXPECT_GE(p.gamma, 1.0);
  }
}

TEST(electron_params, LowVoltageLimitAndRange) {
  EXPECT_NEAR(electron_params(1.0).gamma, 1.0, 2e-3);
  EXPECT_THROW(electron_params(0.5), DomainError);
  EXPECT_THROW(electron_params(3001.0), DomainError);
}

TEST(electron_params, WavelengthDecreasesWithVoltage) {
  double prev = electron_params(1.0).lambda;
  for (double kv = 11.0; kv <= 3000.0; kv += 10.0) {
    const double l = electron_params(kv).lambda;
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(phantom, BlobCentresAreRotationInvariant) {
  for (int n : {1, 6, 7}) {
    PhantomParams p = small_phantom(n);
    PhantomParams rotated = p;
    rotated.orientation = constants::two_pi / n;
    const auto a = phantom_blob_centers(p);
    const auto b = phantom_blob_centers(rotated);
    ASSERT_EQ(a.size(), b.size());
    const std::size_t per = a.size() / n;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& r = b[(i + a.size() - per) % a.size()];
      EXPECT_NEAR(a[i].x, r.x, 1e-12);
      EXPECT_NEAR(a[i].y, r.y, 1e-12);
    }
    for (double x : {3.0, -11.0, 17.5}) {
      EXPECT_NEAR(phantom_potential_at(p, x, 0.4 * x), phantom_potential_at(rotated, x, 0.4 * x), 1e-9);
    }
  }
}

TEST(phantom, PeakPotentialIsTheMapMaximum) {
  for (double packing : {0.3, 0.5, 1.0}) {
    PhantomParams p = small_phantom(7);
    p.packing = packing;
    const SpecimenModel s = make_phantom(GridSpec(256, 90.0), p);
    EXPECT_LE(s.max_potential(), p.peak_potential * (1.0 + 1e-12));
    EXPECT_GT(s.max_potential(), 0.99 * p.peak_potential);
  }
}

TEST(phantom, PackingMovesMassOutward) {
  PhantomParams loose = small_phantom(7);
  PhantomParams tight = loose;
  tight.packing = 1.0;
  EXPECT_GT(phantom_potential_at(loose, 0.0, 0.0), phantom_potential_at(tight, 0.0, 0.0));
}

TEST(phantom, ZeroPeakGivesZeroPotential) {
  PhantomParams p = small_phantom(7);
  p.peak_potential = 0.0;
  const SpecimenModel s = make_phantom(small_grid(), p);
  for (double v : s.potential()) EXPECT_EQ(v, 0.0);
}

TEST(phantom, RejectsBadGeometry) {
  PhantomParams p = small_phantom(7);
  p.ring_radius = 40.0;
  EXPECT_THROW(make_phantom(small_grid(), p), DomainError);
  p = small_phantom(0);
  EXPECT_THROW(make_phantom(small_grid(), p), DomainError);
  p = small_phantom(7);
  p.packing = 0.0;
  EXPECT_THROW(make_phantom(small_grid(), p), DomainError);
}

TEST(phantom, DefaultsGiveWeakPhase) {
  const SpecimenModel s = make_phantom(GridSpec(512, 180.0), PhantomParams{});
  const double phase = electron_params(300.0).sigma * s.max_potential();
  EXPECT_GT(phase, 0.2);
  EXPECT_LT(phase, 0.3);
}

TEST(interact, IdentityForEmptySpecimen) {
  const GridSpec g = small_grid();
  ComplexField probe(g);
  for (int iy = 0; iy < g.n(); ++iy) {
    for (int ix = 0; ix < g.n(); ++ix) probe.at(ix, iy) = cplx(1.0 + 0.01 * ix, 0.02 * iy);
  }
  const SpecimenModel empty(g, std::vector<double>(g.size(), 0.0));
  const ComplexField out = interact(probe, empty, electron_params(300.0));
  ComplexField expected = probe;
  expected.normalize();
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(out.values()[i] - expected.values()[i]), 0.0, 1e-15);
}

TEST(interact, PurePhaseObjectKeepsModulus) {
  const GridSpec g = small_grid();
  const SpecimenModel s = make_phantom(g, small_phantom(7));
  const ComplexField out = interact(plane_wave(g), s, electron_params(300.0));
  const double a = std::abs(out.values()[0]);
  for (const cplx& v : out.values()) EXPECT_NEAR(std::abs(v), a, 1e-14);
  const ElectronParams ep = electron_params(300.0);
  const std::size_t k = g.index(80, 64);
  EXPECT_NEAR(std::arg(out.values()[k]), ep.sigma * s.potential()[k], 1e-12);
}

TEST(interact, AmplitudeMaskApplies) {
  const GridSpec g = small_grid();
  std::vector<double> amp(g.size(), 1.0);
  for (std::size_t i = 0; i < g.size() / 2; ++i) amp[i] = 0.5;
  const SpecimenModel s(g, std::vector<double>(g.size(), 0.0), amp);
  const ComplexField out = interact(plane_wave(g), s, electron_params(300.0));
  EXPECT_NEAR(std::abs(out.values()[0]) / std::abs(out.values()[g.size() - 1]), 0.5, 1e-14);
  EXPECT_NEAR(out.norm(), 1.0, 1e-12);
  EXPECT_THROW(SpecimenModel(g, std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 1.5)), DomainError);
}

TEST(interact, GridMismatchThrows) {
  const SpecimenModel s(small_grid(), std::vector<double>(small_grid().size(), 0.0));
  EXPECT_THROW(interact(plane_wave(GridSpec(64, 90.0)), s, electron_params(300.0)), DomainError);
}

TEST(interact, GlobalPotentialOffsetIsAGlobalPhase) {
  const GridSpec g = small_grid();
  const SpecimenModel s = make_phantom(g, small_phantom(7));
  std::vector<double> shifted(s.potential().begin(), s.potential().end());
  for (double& v : shifted) v += 123.0;
  const ElectronParams ep = electron_params(300.0);
  const ComplexField a = interact(plane_wave(g), s, ep);
  const ComplexField b = interact(plane_wave(g), SpecimenModel(g, shifted), ep);
  cplx ov = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) ov += std::conj(a.values()[i]) * b.values()[i] * g.pixel_area();
  EXPECT_NEAR(std::abs(ov), 1.0, 1e-12);

  const RadialGrid rg(64, default_r_max(g));
  const OamDecomposition da = oam_decompose(a, {0.0, 0.0}, 16, rg);
  const OamDecomposition db = oam_decompose(b, {0.0, 0.0}, 16, rg);
  ASSERT_EQ(da.channels.size(), db.channels.size());
  for (std::size_t i = 0; i < da.channels.size(); ++i) EXPECT_NEAR(da.channels[i].q, db.channels[i].q, 1e-12);
}

TEST(potential_map, RoundTripIsBitExact) {
  const SpecimenModel s = make_phantom(small_grid(), small_phantom(7));
  const SpecimenModel back = parse_potential_map(format_potential_map(s));
  EXPECT_EQ(back.grid(), s.grid());
  for (std::size_t i = 0; i < s.grid().size(); ++i) EXPECT_EQ(back.potential()[i], s.potential()[i]);
}

TEST(potential_map, FileRoundTripMatchesGenerator) {
  const auto dir = std::filesystem::temp_directory_path() / "oamdisc_pmap_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "p7.pmap").string();
  const SpecimenModel s = make_phantom(small_grid(), small_phantom(7));
  save_potential_map(s, path);
  const SpecimenModel back = load_potential_map(path);
  for (std::size_t i = 0; i < s.grid().size(); ++i) EXPECT_EQ(back.potential()[i], s.potential()[i]);
  std::filesystem::remove_all(dir);
}

TEST(potential_map, RejectsMalformedInput) {
  EXPECT_THROW(parse_potential_map("PMAP1 500 180\n0"), FormatError);
  EXPECT_THROW(parse_potential_map("PMAP2 16 180\n"), FormatError);
  EXPECT_THROW(parse_potential_map("PMAP1 16\n"), FormatError);
  std::string text = "PMAP1 16 10\n";
  for (int i = 0; i < 255; ++i) text += "1 ";
  EXPECT_THROW(parse_potential_map(text), FormatError);
  EXPECT_NO_THROW(parse_potential_map(text + "1"));
  EXPECT_THROW(parse_potential_map(text + "1 2"), FormatError);
  EXPECT_THROW(parse_potential_map(text + "x"), FormatError);
  EXPECT_THROW(load_potential_map("/nonexistent/file.pmap"), FormatError);
}
