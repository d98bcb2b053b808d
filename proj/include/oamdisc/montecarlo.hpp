#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oamdisc/discrimination.hpp"
#include "oamdisc/sorter_sim.hpp"

namespace oamdisc {

struct ExperimentConfig {
  double dose = 0.0;   // electrons per square Angstrom
  double area = 0.0;   // illuminated area, square Angstrom
  int truth = 0;       // index of the hypothesis that generated the data
  std::uint64_t seed = 0;
  long long trials = 1;
  /// When set, every trial records exactly round(dose * area) detected electrons instead of
  /// drawing a Poisson number of emitted electrons and discarding the lost ones.
  bool fixed_count = false;

  double mean_electrons() const { return dose * area; }
  void validate() const;
};

struct OutcomeHistogram {
  std::vector<long long> counts;  // one entry per detector cell
  long long detected = 0;         // sum of counts
  long long emitted = 0;          // electrons sent, including lost ones
  long long trial = 0;
  int truth = 0;
};

/// Two-stage draw: the number of emitted electrons, then a detector cell (or loss) per electron.
/// The stream is keyed by (config.seed, config.truth, trial) and is independent of call order.
OutcomeHistogram sample_detection(std::span<const double> dist, const ExperimentConfig& config,
                                  long long trial = 0);
OutcomeHistogram sample_detection(const DetectorImage& image, const ExperimentConfig& config,
                                  long long trial = 0);

struct Decision {
  int hypothesis;
  double llr;  // log(p0 Pr(n0 | 0)) - log(p1 Pr(n0 | 1))
};

Decision classify(const OutcomeHistogram& hist, std::span<const std::uint8_t> regions, const Priors& priors,
                  double s0, double s1);
/// Likelihood-ratio decision from the outcome-0 count alone.
Decision classify_counts(long long n0, long long n, const Priors& priors, double s0, double s1);

/// Everything the dose experiment needs about one pair of hypotheses.
struct PairExperiment {
  std::vector<double> dist0;
  std::vector<double> dist1;
  std::vector<std::uint8_t> regions;
  Priors priors = Priors::equal();
  double s0 = 0.5;
  double s1 = 0.5;
  double area = 0.0;
};

struct TrialResult {
  long long detected;
  long long n0;
  Decision decision;
};

/// Runs config.trials independent trials, spread over `threads` workers; results are ordered by trial.
std::vector<TrialResult> run_trials(const PairExperiment& pair, const ExperimentConfig& config, int threads = 1);

struct CurveRow {
  double dose;
  long long n;          // round(dose * area)
  double empirical;     // prior-weighted fraction of correct decisions
  double predicted;     // n_electron_probability at n
  double standard_error;
};

/// One row per dose. Each dose uses its own seed derived from `seed` and the row index.
std::vector<CurveRow> success_curve(const PairExperiment& pair, std::span<const double> doses, std::uint64_t seed,
                                    long long trials, bool fixed_count = false, int threads = 1);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace oamdisc
