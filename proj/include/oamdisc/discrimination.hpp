#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "oamdisc/oam_decomp.hpp"
#include "oamdisc/physics_field.hpp"

namespace oamdisc {

/// A priori probabilities of the two hypotheses.
class Priors {
 public:
  Priors(double p0, double p1);
  static Priors equal() { return Priors(0.5, 0.5); }

  double p0() const { return p0_; }
  double p1() const { return p1_; }
  double operator[](int k) const { return k == 0 ? p0_ : p1_; }
  double max() const { return p0_ >= p1_ ? p0_ : p1_; }
  Priors swapped() const { return Priors(p1_, p0_); }

 private:
  double p0_;
  double p1_;
};

enum class ChannelKind { Both, Collinear, OnlyHypothesis0, OnlyHypothesis1 };

/// Two-outcome radial measurement inside one OAM channel.
///
/// outcome0 / outcome1 are orthonormal vectors inside span_basis; the projector of each outcome is
/// the sum of their rank-one projectors, plus the orthogonal complement of the span for the
/// outcome named by complement_outcome.
struct SchemeChannel {
  int m;
  ChannelKind kind;
  std::vector<std::vector<cplx>> span_basis;
  std::vector<std::vector<cplx>> outcome0;
  std::vector<std::vector<cplx>> outcome1;
  int complement_outcome;
  std::array<double, 2> eigenvalues;  // of sigma_m on the span, descending (second is 0 when 1D)
  std::vector<cplx> flatten_target;   // unit-norm radial profile the sorter flattens against
  double designated_weight;           // <chi_0|pi_0|chi_0>, 0 when hypothesis 0 is absent
};

struct MeasurementScheme {
  RadialGrid radial_grid;
  int m_max;
  std::vector<SchemeChannel> channels;  // sorted by m

  const SchemeChannel* find(int m) const;
};

/// Dense matrix (row-major, n_r x n_r) of an outcome operator in the orthonormal coordinates
/// x_j = sqrt(w_j) chi_j of the radial grid.
std::vector<cplx> outcome_operator_matrix(const SchemeChannel& channel, const RadialGrid& grid,
                                          int outcome);

/// (p, s0, s1): success probability under maximum-likelihood assignment of every outcome, and
/// the per-hypothesis conditional success probabilities s_k = tr(rho_k Pi_k).
struct SuccessStats {
  double p;
  double s0;
  double s1;
};

double helstrom_pure(double overlap_mag, const Priors& priors);

/// Optimal single-electron success for dephased states: 1/2 + 1/2 sum_m of the trace norm of
/// p0 q0m |chi0m><chi0m| - p1 q1m |chi1m><chi1m|. q values are renormalized to the captured weight first.
double helstrom_mixed(const MixedState& rho0, const MixedState& rho1, const Priors& priors);
double helstrom_mixed(const OamDecomposition& dec0, const OamDecomposition& dec1, const Priors& priors);

MeasurementScheme optimal_scheme(const MixedState& rho0, const MixedState& rho1, const Priors& priors);
MeasurementScheme optimal_scheme(const OamDecomposition& dec0, const OamDecomposition& dec1,
                                 const Priors& priors);

/// Channels of the states that the scheme does not list are read out wholly as outcome 0.
SuccessStats scheme_probability(const MeasurementScheme& scheme, const MixedState& rho0,
                                const MixedState& rho1, const Priors& priors);
SuccessStats scheme_probability(const MeasurementScheme& scheme, const OamDecomposition& dec0,
                                const OamDecomposition& dec1, const Priors& priors);

/// |<psi0|psi1>| of the captured states, each renormalized to unit weight inside the disk.
double overlap_magnitude(const OamDecomposition& dec0, const OamDecomposition& dec1);

/// Detector intensity (probability per pixel) of a pure field after an optional ideal Zernike
/// plate, which multiplies the zero-frequency sample by i.
std::vector<double> real_space_intensity(const ComplexField& field, bool zernike);

/// Rotation-averaged (dephased) counterpart computed channel by channel: the Zernike plate only
/// shifts the m = 0 component by a constant, and channel cross terms vanish.
std::vector<double> real_space_intensity_mixed(const ComplexField& field, Point2 center,
                                               const RadialGrid& radial_grid, bool zernike,
                                               int n_theta = 0);

/// Maximum-likelihood success over detector pixels.
SuccessStats detector_success(std::span<const double> prob0, std::span<const double> prob1,
                              const Priors& priors);

SuccessStats real_space_probability(const ComplexField& field0, const ComplexField& field1,
                                    const Priors& priors, bool zernike);
SuccessStats real_space_probability_mixed(const ComplexField& field0, const ComplexField& field1,
                                          Point2 center, const RadialGrid& radial_grid,
                                          const Priors& priors, bool zernike, int n_theta = 0);

/// Optimal N-electron success probability given the binary per-electron statistics (s0, s1):
/// outcome 0 occurs with probability s0 under hypothesis 0 and 1 - s1 under hypothesis 1.
double n_electron_probability(double s0, double s1, const Priors& priors, long long n);

/// Smallest N with n_electron_probability >= x. Throws UnreachableThreshold when the per-electron
/// statistics carry no information (s0 + s1 == 1) or N would exceed kMaxElectrons.
long long n_min(double s0, double s1, const Priors& priors, double x);
inline constexpr long long kMaxElectrons = 1LL << 26;

/// Discrimination figures for one pair of specimens.
struct DiscriminationReport {
  std::string label;
  double overlap = 0.0;
  double p_max_pure = 0.0;
  double p_max_mixed = 0.0;
  double p_real_space = 0.0;       // mixed states, ideal Zernike plate
  double p_real_space_pure = 0.0;  // pure states, ideal Zernike plate
  double p_oam_exact = 0.0;
  double p_oam_physical = 0.0;    // sorter detector regions plus the undetected outcome
  double s0 = 0.0;  // exact optimal scheme
  double s1 = 0.0;
  double s0_physical = 0.0;  // sorter detector regions, conditional on detection
  double s1_physical = 0.0;
  double s0_real_space = 0.0;
  double s1_real_space = 0.0;
  double area = 0.0;  // illuminated area, Angstrom^2
  Priors priors = Priors::equal();
  std::vector<double> thresholds;
  std::vector<std::optional<long long>> n_min_oam;  // from the physical sorter statistics
  std::vector<std::optional<long long>> n_min_oam_exact;
  std::vector<std::optional<long long>> n_min_real_space;
  std::vector<std::optional<double>> dose;  // n_min_oam / area
};

std::optional<long long> try_n_min(double s0, double s1, const Priors& priors, double x);

}  // namespace oamdisc
