#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "oamdisc/discrimination.hpp"
#include "oamdisc/oam_decomp.hpp"
#include "oamdisc/physics_field.hpp"

namespace oamdisc {

/// Uniform grid in u = ln r with n_u cells spanning [ln r_min, ln r_max].
class LogAxis {
 public:
  LogAxis(double r_min, double r_max, int n_u);

  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  int n_u() const { return n_u_; }
  double du() const { return du_; }
  double u(int j) const { return std::log(r_min_) + (j + 0.5) * du_; }
  double radius(int j) const { return std::exp(u(j)); }
  double cell_inner(int j) const;
  double cell_outer(int j) const;
  /// sqrt(cell area / (2 pi du)); multiplying a Cartesian amplitude by it makes the map
  /// norm-preserving for profiles constant on each log cell.
  double jacobian(int j) const;

  bool operator==(const LogAxis&) const = default;

 private:
  double r_min_;
  double r_max_;
  int n_u_;
  double du_;
};

struct LogPolarField {
  LogAxis axis;
  int n_v;
  std::vector<cplx> values;  // row j (u) holds n_v samples over v = theta in [0, 2 pi)

  double dv() const { return constants::two_pi / n_v; }
  double weight() const;
};

/// Complex profile over the uniform u grid; weight = sum |g|^2 du.
struct LogProfile {
  double du;
  std::vector<cplx> values;

  double weight() const;
};

struct SorterConfig {
  double r_min;
  int n_u = 256;
  int n_v = 256;

  /// r_min of two pixels.
  static SorterConfig defaults(const GridSpec& grid);
};

LogPolarField log_polar_unwrap(const ComplexField& field, Point2 center, double r_min, double r_max,
                               int n_u, int n_v);
/// Inverse map onto the Cartesian grid (bilinear in u, v); zero outside the annulus.
ComplexField log_polar_rewrap(const LogPolarField& lp, const GridSpec& grid, Point2 center);

/// Fourier analysis along v: channel m -> sqrt(2 pi) * (1/n_v) sum_l lp(u, v_l) e^{-i m v_l}.
std::map<int, LogProfile> separate_channels(const LogPolarField& lp);
/// Channel weights normalized to unit total.
std::map<int, double> channel_weights(const std::map<int, LogProfile>& channels);

/// Multiplies by exp(-i arg target); bins where the target vanishes keep their phase.
LogProfile phase_flatten(const LogProfile& profile, const LogProfile& target);

/// |DFT along u|^2 normalized to the profile weight, reordered so the zero frequency is bin n_u/2.
std::vector<double> radial_diffract(const LogProfile& profile);

/// Area-weighted projection of a radial-grid profile onto the log cells (a contraction).
class RadialToLog {
 public:
  RadialToLog(const RadialGrid& radial, const LogAxis& axis);

  LogProfile apply(std::span<const cplx> chi) const;
  const LogAxis& axis() const { return axis_; }

 private:
  struct Entry {
    int log_cell;
    int radial_bin;
    double coeff;
  };
  RadialGrid radial_;
  LogAxis axis_;
  std::vector<Entry> entries_;
};

/// Detector intensities over cells (m, bin) for m in [-m_max, m_max] and n_bins radial bins.
struct DetectorImage {
  int m_max;
  int n_bins;
  std::vector<double> intensity;  // cell (m, bin) at (m + m_max) * n_bins + bin
  double truncation_loss;

  int n_channels() const { return 2 * m_max + 1; }
  std::size_t cell(int m, int bin) const {
    return static_cast<std::size_t>(m + m_max) * n_bins + bin;
  }
  double total() const;
  /// Image layout: n_bins rows, one column per channel (m increasing left to right).
  std::vector<double> layout() const;
};

DetectorImage physical_measurement_distribution(const MixedState& state, const MeasurementScheme& scheme,
                                                const SorterConfig& config);
DetectorImage physical_measurement_distribution(const OamDecomposition& dec, const MeasurementScheme& scheme,
                                                const SorterConfig& config);

/// Outcome assignment of every detector cell. Within a channel measured in the two-dimensional
/// span, outcome 0 is the smallest window of bins centred on the zero frequency that captures at
/// least the scheme's designated weight of hypothesis 0's flattened and diffracted profile.
struct OutcomeRegions {
  int m_max;
  int n_bins;
  std::vector<std::uint8_t> outcome;  // per cell, same indexing as DetectorImage
  std::vector<int> half_width;        // per channel: -1 none, n_bins all, otherwise window half-width

  std::size_t cell(int m, int bin) const {
    return static_cast<std::size_t>(m + m_max) * n_bins + bin;
  }
};

OutcomeRegions outcome_regions(const MeasurementScheme& scheme, const SorterConfig& config);

/// Conditional (on detection) probability of landing in each outcome region.
struct RegionStats {
  double s0;  // Pr(outcome 0 | detected, hypothesis 0)
  double s1;  // Pr(outcome 1 | detected, hypothesis 1)
};
RegionStats region_statistics(const DetectorImage& image0, const DetectorImage& image1,
                              const OutcomeRegions& regions);

}  // namespace oamdisc
