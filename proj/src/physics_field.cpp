#include "oamdisc/physics_field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oamdisc/errors.hpp"

namespace oamdisc {

bool is_power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

GridSpec::GridSpec(int n, double fov) : n_(n), fov_(fov) {
  if (n < 16 || !is_power_of_two(n)) {
    throw DomainError("grid side must be a power of two >= 16, got " + std::to_string(n));
  }
  if (!(fov > 0.0) || !std::isfinite(fov)) {
    throw DomainError("field of view must be positive");
  }
}

ComplexField::ComplexField(GridSpec grid) : grid_(grid), values_(grid.size()) {}

ComplexField::ComplexField(GridSpec grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("field size does not match grid");
  }
}

double ComplexField::norm() const {
  double s = 0.0;
  for (const cplx& v : values_) s += std::norm(v);
  return s * grid_.pixel_area();
}

void ComplexField::normalize() {
  const double nrm = norm();
  if (!(nrm > 0.0)) throw DomainError("cannot normalize a zero field");
  const double scale = 1.0 / std::sqrt(nrm);
  for (cplx& v : values_) v *= scale;
}

cplx ComplexField::sample(double x, double y) const {
  const int n = grid_.n();
  const double fx = x / grid_.pixel() + n / 2;
  const double fy = y / grid_.pixel() + n / 2;
  constexpr double slack = 1e-9;
  if (fx < -slack || fy < -slack || fx > n - 1 + slack || fy > n - 1 + slack) {
    throw DomainError("sample point outside the grid");
  }
  int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
  int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
  const double tx = std::clamp(fx - ix, 0.0, 1.0);
  const double ty = std::clamp(fy - iy, 0.0, 1.0);
  const cplx a = at(ix, iy);
  const cplx b = at(ix + 1, iy);
  const cplx c = at(ix, iy + 1);
  const cplx d = at(ix + 1, iy + 1);
  return (1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * d);
}

ComplexField plane_wave(const GridSpec& grid) {
  ComplexField f(grid, std::vector<cplx>(grid.size(), cplx(1.0 / grid.fov(), 0.0)));
  return f;
}

ElectronParams electron_params(double voltage_kv) {
  if (!(voltage_kv >= 1.0 && voltage_kv <= 3000.0)) {
    throw DomainError("accelerating voltage must lie in [1, 3000] kV");
  }
  using namespace constants;
  const double energy = elementary_charge * voltage_kv * 1e3;  // J
  const double rest = electron_mass * speed_of_light * speed_of_light;
  const double momentum = std::sqrt(2.0 * electron_mass * energy * (1.0 + energy / (2.0 * rest)));
  const double lambda_m = planck / momentum;
  const double gamma = 1.0 + energy / rest;
  // rad/(V m) -> rad/(V Angstrom)
  const double sigma =
      two_pi * electron_mass * gamma * elementary_charge * lambda_m / (planck * planck) * 1e-10;
  return ElectronParams{voltage_kv, lambda_m * 1e10, gamma, sigma};
}

SpecimenModel::SpecimenModel(GridSpec grid, std::vector<double> potential,
                             std::optional<std::vector<double>> amplitude)
    : grid_(grid), potential_(std::move(potential)), amplitude_(std::move(amplitude)) {
  if (potential_.size() != grid_.size()) throw DomainError("potential size does not match grid");
  for (double v : potential_) {
    if (!std::isfinite(v)) throw DomainError("potential contains non-finite values");
  }
  if (amplitude_) {
    if (amplitude_->size() != grid_.size()) throw DomainError("amplitude size does not match grid");
    for (double a : *amplitude_) {
      if (!(a >= 0.0 && a <= 1.0)) throw DomainError("amplitude values must lie in [0, 1]");
    }
  }
}

std::span<const double> SpecimenModel::amplitude() const {
  if (!amplitude_) return {};
  return *amplitude_;
}

double SpecimenModel::max_potential() const {
  return *std::max_element(potential_.begin(), potential_.end());
}

namespace {

void validate_phantom(const GridSpec& grid, const PhantomParams& p) {
  if (p.n_fold < 1) throw DomainError("n_fold must be >= 1");
  if (!(p.blob_sigma > 0.0)) throw DomainError("blob_sigma must be positive");
  if (!(p.packing > 0.0 && p.packing <= 1.0)) throw DomainError("packing must lie in (0, 1]");
  if (!(p.ring_radius >= 0.0)) throw DomainError("ring_radius must be non-negative");
  if (!std::isfinite(p.peak_potential)) throw DomainError("peak_potential must be finite");
  if (!(p.ring_radius + 3.0 * p.blob_sigma < grid.fov() / 2.0)) {
    throw DomainError("phantom geometry exceeds the field of view");
  }
}

// Spacing between consecutive blobs of one subunit chain.
double chain_spacing(const PhantomParams& p) { return p.blob_sigma * (0.75 + 1.5 * (1.0 - p.packing)); }

constexpr int kBlobsPerSubunit = 3;

}  // namespace

std::vector<Point2> phantom_blob_centers(const PhantomParams& p) {
  std::vector<Point2> centers;
  centers.reserve(static_cast<std::size_t>(p.n_fold) * kBlobsPerSubunit);
  const double d = chain_spacing(p);
  for (int s = 0; s < p.n_fold; ++s) {
    const double angle = p.orientation + constants::two_pi * s / p.n_fold;
    const double c = std::cos(angle);
    const double sn = std::sin(angle);
    for (int k = 0; k < kBlobsPerSubunit; ++k) {
      const double r = p.ring_radius - k * d;
      centers.push_back({r * c, r * sn});
    }
  }
  return centers;
}

namespace {

double unit_blob_sum(const std::vector<Point2>& centers, double inv, double x, double y) {
  double v = 0.0;
  for (const Point2& c : centers) {
    const double dx = x - c.x;
    const double dy = y - c.y;
    v += std::exp(-(dx * dx + dy * dy) * inv);
  }
  return v;
}

}  // namespace

double phantom_blob_amplitude(const PhantomParams& p) {
  if (p.peak_potential == 0.0) return 0.0;
  const auto centers = phantom_blob_centers(p);
  const double inv = 1.0 / (2.0 * p.blob_sigma * p.blob_sigma);
  const double c = std::cos(p.orientation);
  const double sn = std::sin(p.orientation);
  auto along = [&](double r) { return unit_blob_sum(centers, inv, r * c, r * sn); };
  // The maximum lies on a subunit axis; coarse scan, then golden-section refinement.
  const double step = p.blob_sigma / 64.0;
  const double reach = p.ring_radius + 3.0 * p.blob_sigma;
  double best_r = 0.0;
  double best = along(0.0);
  for (double r = step; r <= reach; r += step) {
    const double v = along(r);
    if (v > best) {
      best = v;
      best_r = r;
    }
  }
  double lo = std::max(0.0, best_r - step);
  double hi = best_r + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 60; ++it) {
    const double a = hi - g * (hi - lo);
    const double b = lo + g * (hi - lo);
    if (along(a) < along(b)) {
      lo = a;
    } else {
      hi = b;
    }
  }
  best = std::max(best, along(0.5 * (lo + hi)));
  return p.peak_potential / best;
}

double phantom_potential_at(const PhantomParams& p, double x, double y) {
  if (p.peak_potential == 0.0) return 0.0;
  const double inv = 1.0 / (2.0 * p.blob_sigma * p.blob_sigma);
  return phantom_blob_amplitude(p) * unit_blob_sum(phantom_blob_centers(p), inv, x, y);
}

SpecimenModel make_phantom(const GridSpec& grid, const PhantomParams& p) {
  validate_phantom(grid, p);
  std::vector<double> potential(grid.size(), 0.0);
  if (p.peak_potential != 0.0) {
    const auto centers = phantom_blob_centers(p);
    const double inv = 1.0 / (2.0 * p.blob_sigma * p.blob_sigma);
    const double amp = phantom_blob_amplitude(p);
    for (int iy = 0; iy < grid.n(); ++iy) {
      const double y = grid.coord(iy);
      for (int ix = 0; ix < grid.n(); ++ix) {
        const double x = grid.coord(ix);
        potential[grid.index(ix, iy)] = amp * unit_blob_sum(centers, inv, x, y);
      }
    }
  }
  return SpecimenModel(grid, std::move(potential));
}

ComplexField interact(const ComplexField& probe, const SpecimenModel& specimen,
                      const ElectronParams& params) {
  if (!(probe.grid() == specimen.grid())) throw DomainError("probe and specimen grids differ");
  std::vector<cplx> out(probe.values().begin(), probe.values().end());
  const auto v = specimen.potential();
  const auto a = specimen.amplitude();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double phase = params.sigma * v[i];
    cplx t(std::cos(phase), std::sin(phase));
    if (!a.empty()) t *= a[i];
    out[i] *= t;
  }
  ComplexField f(probe.grid(), std::move(out));
  f.normalize();
  return f;
}

}  // namespace oamdisc
