#include "oamdisc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "oamdisc/errors.hpp"
#include "oamdisc/philox.hpp"

namespace oamdisc {

void ExperimentConfig::validate() const {
  if (!(dose >= 0.0) || !std::isfinite(dose)) throw DomainError("dose must be finite and non-negative");
  if (!(area > 0.0) || !std::isfinite(area)) throw DomainError("illuminated area must be positive");
  if (truth != 0 && truth != 1) throw DomainError("truth must be 0 or 1");
  if (trials < 1) throw DomainError("need at least one trial");
}

namespace {

OutcomeHistogram sample_with(const CategoricalTable& table, const ExperimentConfig& config, long long trial) {
  Philox4x32 rng(config.seed, static_cast<std::uint32_t>(config.truth), static_cast<std::uint64_t>(trial));
  OutcomeHistogram h{std::vector<long long>(table.size(), 0), 0, 0, trial, config.truth};
  if (config.fixed_count) {
    const long long n = std::llround(config.mean_electrons());
    if (n > 0 && !(table.total() > 0.0)) throw DomainError("distribution has no detectable weight");
    h.emitted = 0;
    while (h.detected < n) {
      const std::size_t c = table.draw(rng);
      ++h.emitted;
      if (c == table.size()) continue;
      ++h.counts[c];
      ++h.detected;
    }
    return h;
  }
  h.emitted = poisson(rng, config.mean_electrons());
  for (long long e = 0; e < h.emitted; ++e) {
    const std::size_t c = table.draw(rng);
    if (c == table.size()) continue;
    ++h.counts[c];
    ++h.detected;
  }
  return h;
}

}  // namespace

OutcomeHistogram sample_detection(std::span<const double> dist, const ExperimentConfig& config, long long trial) {
  config.validate();
  return sample_with(CategoricalTable(dist), config, trial);
}

OutcomeHistogram sample_detection(const DetectorImage& image, const ExperimentConfig& config, long long trial) {
  return sample_detection(std::span<const double>(image.intensity), config, trial);
}

Decision classify_counts(long long n0, long long n, const Priors& priors, double s0, double s1) {
  if (n0 < 0 || n0 > n) throw DomainError("outcome-0 count out of range");
  const long long n1 = n - n0;
  auto xlog = [](long long k, double p) {
    if (k == 0) return 0.0;
    return p > 0.0 ? static_cast<double>(k) * std::log(p) : -std::numeric_limits<double>::infinity();
  };
  const double l0 = std::log(priors.p0()) + xlog(n0, s0) + xlog(n1, 1.0 - s0);
  const double l1 = std::log(priors.p1()) + xlog(n0, 1.0 - s1) + xlog(n1, s1);
  if (std::isinf(l0) && std::isinf(l1)) return Decision{0, 0.0};
  const double llr = l0 - l1;
  return Decision{llr >= 0.0 ? 0 : 1, llr};
}

Decision classify(const OutcomeHistogram& hist, std::span<const std::uint8_t> regions, const Priors& priors,
                  double s0, double s1) {
  if (regions.size() != hist.counts.size()) throw DomainError("region map does not cover the histogram");
  long long n0 = 0;
  long long n = 0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    n += hist.counts[i];
    if (regions[i] == 0) n0 += hist.counts[i];
  }
  return classify_counts(n0, n, priors, s0, s1);
}

std::vector<TrialResult> run_trials(const PairExperiment& pair, const ExperimentConfig& config, int threads) {
  config.validate();
  if (pair.regions.size() != pair.dist0.size() || pair.regions.size() != pair.dist1.size()) {
    throw DomainError("distributions and region map differ in size");
  }
  const CategoricalTable table(config.truth == 0 ? pair.dist0 : pair.dist1);
  std::vector<TrialResult> results(static_cast<std::size_t>(config.trials));
  std::atomic<long long> next{0};
  auto worker = [&] {
    for (long long t = next++; t < config.trials; t = next++) {
      const OutcomeHistogram h = sample_with(table, config, t);
      long long n0 = 0;
      for (std::size_t i = 0; i < h.counts.size(); ++i) {
        if (pair.regions[i] == 0) n0 += h.counts[i];
      }
      results[static_cast<std::size_t>(t)] =
          TrialResult{h.detected, n0, classify_counts(n0, h.detected, pair.priors, pair.s0, pair.s1)};
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return results;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<CurveRow> success_curve(const PairExperiment& pair, std::span<const double> doses, std::uint64_t seed,
                                    long long trials, bool fixed_count, int threads) {
  std::vector<CurveRow> rows;
  for (std::size_t d = 0; d < doses.size(); ++d) {
    ExperimentConfig cfg{doses[d], pair.area, 0, derive_seed(seed, d), trials, fixed_count};
    cfg.validate();
    double empirical = 0.0;
    for (int truth = 0; truth < 2; ++truth) {
      cfg.truth = truth;
      const std::vector<TrialResult> res = run_trials(pair, cfg, threads);
      const auto hits = std::count_if(res.begin(), res.end(),
                                      [truth](const TrialResult& r) { return r.decision.hypothesis == truth; });
      empirical += pair.priors[truth] * static_cast<double>(hits) / static_cast<double>(trials);
    }
    const long long n = std::llround(cfg.mean_electrons());
    const double predicted = n_electron_probability(pair.s0, pair.s1, pair.priors, n);
    const double se = std::sqrt(std::max(predicted * (1.0 - predicted), 0.0) / static_cast<double>(trials));
    rows.push_back(CurveRow{doses[d], n, empirical, predicted, se});
  }
  return rows;
}

}  // namespace oamdisc
