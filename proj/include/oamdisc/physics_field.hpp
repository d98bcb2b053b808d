#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oamdisc {

using cplx = std::complex<double>;

namespace constants {
// CODATA 2018 exact / recommended values, SI units.
inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double electron_mass = 9.1093837015e-31;  // kg
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double speed_of_light = 299792458.0;
inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;
}  // namespace constants

/// Square sampling grid of n x n pixels covering fov x fov Angstrom.
///
/// Pixel (ix, iy) sits at physical coordinates ((ix - n/2) * pixel, (iy - n/2) * pixel),
/// so the origin coincides with pixel (n/2, n/2).
class GridSpec {
 public:
  GridSpec(int n, double fov);

  int n() const { return n_; }
  double fov() const { return fov_; }
  double pixel() const { return fov_ / n_; }
  double pixel_area() const { return pixel() * pixel(); }
  double area() const { return fov_ * fov_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  double coord(int i) const { return (i - n_ / 2) * pixel(); }
  double min_coord() const { return coord(0); }
  double max_coord() const { return coord(n_ - 1); }
  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * n_ + ix; }

  bool operator==(const GridSpec&) const = default;

 private:
  int n_;
  double fov_;
};

/// Complex transverse wave function; norm is sum |psi|^2 * pixel area.
class ComplexField {
 public:
  explicit ComplexField(GridSpec grid);
  ComplexField(GridSpec grid, std::vector<cplx> values);

  const GridSpec& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }

  cplx& at(int ix, int iy) { return values_[grid_.index(ix, iy)]; }
  const cplx& at(int ix, int iy) const { return values_[grid_.index(ix, iy)]; }

  double norm() const;
  void normalize();

  /// Bilinear interpolation at physical coordinates; points must lie within the pixel-centre hull.
  cplx sample(double x, double y) const;

 private:
  GridSpec grid_;
  std::vector<cplx> values_;
};

/// Uniform unit-normalized plane wave on the grid.
ComplexField plane_wave(const GridSpec& grid);

struct ElectronParams {
  double voltage_kv;
  double lambda;  // Angstrom
  double gamma;
  double sigma;   // rad / (V Angstrom)
};

/// Relativistic wavelength and interaction constant for an accelerating voltage in [1, 3000] kV.
ElectronParams electron_params(double voltage_kv);

/// Projected potential V(x, y) in V*Angstrom plus an amplitude mask in [0, 1].
class SpecimenModel {
 public:
  SpecimenModel(GridSpec grid, std::vector<double> potential,
                std::optional<std::vector<double>> amplitude = std::nullopt);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> potential() const { return potential_; }
  /// Empty when the specimen is a pure phase object (A == 1).
  std::span<const double> amplitude() const;
  bool has_amplitude() const { return amplitude_.has_value(); }

  double max_potential() const;

 private:
  GridSpec grid_;
  std::vector<double> potential_;
  std::optional<std::vector<double>> amplitude_;
};

/// Gaussian-blob stand-in for an n-fold symmetric molecule.
///
/// Each of the n_fold subunits is a radial chain of three blobs whose outermost member sits on
/// ring_radius. packing in (0, 1] sets the chain spacing: 1 gives a tight profile, small values
/// spread mass towards the centre. All blobs share one amplitude, chosen so that the maximum of
/// the summed potential equals peak_potential.
struct PhantomParams {
  int n_fold = 7;
  double ring_radius = 36.0;     // Angstrom
  double blob_sigma = 6.0;       // Angstrom
  double packing = 1.0;
  double peak_potential = 380.0; // V*Angstrom, maximum of the map
  double orientation = 0.0;      // rad
};

struct Point2 {
  double x;
  double y;
};

std::vector<Point2> phantom_blob_centers(const PhantomParams& params);
/// Amplitude shared by every blob.
double phantom_blob_amplitude(const PhantomParams& params);
double phantom_potential_at(const PhantomParams& params, double x, double y);
SpecimenModel make_phantom(const GridSpec& grid, const PhantomParams& params);

/// psi_out = A * exp(i sigma V) * psi_probe, renormalized.
ComplexField interact(const ComplexField& probe, const SpecimenModel& specimen,
                      const ElectronParams& params);

/// Writes/reads the PMAP1 text format (header `PMAP1 <n> <fov>` then n*n row-major values).
void save_potential_map(const SpecimenModel& specimen, const std::string& path);
std::string format_potential_map(const SpecimenModel& specimen);
SpecimenModel load_potential_map(const std::string& path);
SpecimenModel parse_potential_map(const std::string& text);

bool is_power_of_two(long long v);

}  // namespace oamdisc
