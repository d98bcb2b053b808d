#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oamdisc/physics_field.hpp"
#include "oamdisc/pipeline.hpp"

namespace oamdisc {

/// A specimen is either generated from phantom parameters or read from a PMAP1 file.
struct HypothesisSpec {
  std::string label;
  std::optional<PhantomParams> phantom;
  std::string map_path;  // resolved against the config file's directory
};

/// Run configuration, read from JSON:
///
///   {
///     "voltage_kv": 300,
///     "grid": {"n": 512, "fov": 180},
///     "hypotheses": [{"label": "Pa", "phantom": {"n_fold": 7, "packing": 0.5}},
///                    {"label": "M", "map": "specimen.pmap"}],
///     "pairs": [["Pa", "M"]],
///     "priors": [0.5, 0.5],
///     "thresholds": [0.9, 0.99],
///     "doses": [0.2, 2],
///     "seed": 1,
///     "trials": 1000,
///     "decomposition": {"m_max": 32, "n_r": 256},
///     "sorter": {"n_u": 256, "n_v": 256, "r_min": 0.703125},
///     "output_dir": "out"
///   }
///
/// Every key is optional; unknown keys anywhere are rejected. Phantom objects accept n_fold,
/// ring_radius, blob_sigma, packing, peak_potential and orientation.
struct RunConfig {
  double voltage_kv = 300.0;
  int grid_n = 512;
  double fov = 180.0;
  std::vector<HypothesisSpec> hypotheses;
  std::vector<std::pair<std::string, std::string>> pairs;
  double p0 = 0.5;
  double p1 = 0.5;
  std::vector<double> thresholds{0.9, 0.99};
  std::vector<double> doses{0.2, 2.0};
  std::uint64_t seed = 1;
  long long trials = 1000;
  int m_max = kDefaultMMax;
  int n_r = kDefaultRadialBins;
  int n_u = 256;
  int n_v = 256;
  std::optional<double> r_min;
  std::string output_dir = "out";

  /// Default hypotheses are Pa, Pb, Pc with pairs (Pa,Pb), (Pa,Pc), (Pb,Pc).
  static RunConfig defaults();

  GridSpec grid() const { return GridSpec(grid_n, fov); }
  AnalysisSettings settings(int threads = 1) const;
  const HypothesisSpec& hypothesis(const std::string& label) const;
  Specimen build(const std::string& label) const;
  void validate() const;
};

/// Throws FormatError for malformed JSON, unknown keys or wrongly typed values, and
/// DomainError for values outside their valid range.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

}  // namespace oamdisc
