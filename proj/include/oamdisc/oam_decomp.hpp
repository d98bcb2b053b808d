#pragma once

#include <span>
#include <vector>

#include "oamdisc/physics_field.hpp"

namespace oamdisc {

/// Uniform radial bins on [0, r_max]; centres r_j = (j + 1/2) dr, weights w_j = r_j dr.
///
/// w_j is the exact area (divided by 2 pi) of the annulus covered by bin j, so the
/// weighted inner product is exact for profiles that are constant on each annulus.
class RadialGrid {
 public:
  RadialGrid(int n_r, double r_max);

  int n_r() const { return n_r_; }
  double r_max() const { return r_max_; }
  double dr() const { return r_max_ / n_r_; }
  double r(int j) const { return (j + 0.5) * dr(); }
  double weight(int j) const { return r(j) * dr(); }

  cplx inner(std::span<const cplx> u, std::span<const cplx> v) const;
  double norm2(std::span<const cplx> u) const;

  bool operator==(const RadialGrid&) const = default;

 private:
  int n_r_;
  double r_max_;
};

inline constexpr int kDefaultMMax = 32;
inline constexpr int kDefaultRadialBins = 256;
/// Channels lighter than this are folded into the truncation loss.
inline constexpr double kChannelDropThreshold = 1e-12;

/// Largest radius fully inside the pixel-centre hull of the grid: fov/2 * (1 - 2/n).
double default_r_max(const GridSpec& grid);
RadialGrid default_radial_grid(const GridSpec& grid);

struct OamChannel {
  int m;
  double q;
  double alpha;             // (-pi, pi]
  std::vector<cplx> chi;    // unit norm on the radial grid
};

/// Channel-resolved representation of a pure state restricted to the disk r <= r_max.
///
/// q values are fractions of the weight captured inside the disk. alpha_m is the phase of the
/// raw radial profile at its largest-modulus bin (first such bin), so chi_m is real and
/// positive there.
struct OamDecomposition {
  RadialGrid radial_grid;
  int m_max;
  Point2 center;
  std::vector<OamChannel> channels;  // sorted by m, q > 0
  double truncation_loss;            // 1 - sum q
  double captured_weight;            // disk weight / total field weight
  bool low_capture;                  // captured_weight < 0.99

  const OamChannel* find(int m) const;
};

struct MixedChannel {
  int m;
  double q;
  std::vector<cplx> chi;
};

/// Dephased counterpart of an OamDecomposition: the inter-channel phases are gone.
struct MixedState {
  RadialGrid radial_grid;
  int m_max;
  std::vector<MixedChannel> channels;  // sorted by m
  double truncation_loss;

  const MixedChannel* find(int m) const;
};

/// Azimuthal Fourier coefficients c_k(r_j) = (1/N) sum_l psi(r_j, theta_l) exp(-i m_k theta_l)
/// of a field resampled (bilinear) onto the polar grid.
struct AngularSpectrum {
  RadialGrid radial_grid;
  int n_theta;
  std::vector<cplx> coeffs;  // row j holds n_theta coefficients in FFT order

  int m_of(int k) const { return k < n_theta / 2 ? k : k - n_theta; }
  int index_of(int m) const { return m >= 0 ? m : m + n_theta; }
  cplx at(int j, int m) const { return coeffs[static_cast<std::size_t>(j) * n_theta + index_of(m)]; }
  /// 2 pi sum_j w_j sum_k |c_k(r_j)|^2, i.e. the field weight inside the disk.
  double total_weight() const;
};

int default_angular_samples(int m_max);

AngularSpectrum angular_spectrum(const ComplexField& field, Point2 center,
                                 const RadialGrid& radial_grid, int n_theta);

OamDecomposition oam_decompose(const ComplexField& field, Point2 center, int m_max,
                               const RadialGrid& radial_grid, int n_theta = 0);

/// Sum_m sqrt(q_m) e^{i alpha_m} chi_m(r) e^{i m theta} / sqrt(2 pi) on the Cartesian grid (zero
/// outside r_max), so a decomposition without truncation loss yields a unit-norm field.
/// chi_m is interpolated with a cubic Catmull-Rom kernel.
ComplexField recompose(const OamDecomposition& dec, const GridSpec& grid, Point2 center);

cplx state_overlap(const OamDecomposition& dec0, const OamDecomposition& dec1);

MixedState dephase(const OamDecomposition& dec);
MixedState dephase(const MixedState& state);

}  // namespace oamdisc
