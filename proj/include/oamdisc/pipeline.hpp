#pragma once

#include <string>
#include <utility>
#include <vector>

#include "oamdisc/discrimination.hpp"
#include "oamdisc/montecarlo.hpp"
#include "oamdisc/oam_decomp.hpp"
#include "oamdisc/physics_field.hpp"
#include "oamdisc/sorter_sim.hpp"

namespace oamdisc {

struct AnalysisSettings {
  double voltage_kv = 300.0;
  GridSpec grid{512, 180.0};
  Priors priors = Priors::equal();
  std::vector<double> thresholds{0.9, 0.99};
  int m_max = kDefaultMMax;
  int n_r = kDefaultRadialBins;
  SorterConfig sorter = SorterConfig::defaults(GridSpec{512, 180.0});
  /// Worker threads for the two specimens of a pair.
  int threads = 1;

  RadialGrid radial_grid() const { return RadialGrid(n_r, default_r_max(grid)); }
};

struct Specimen {
  std::string label;
  SpecimenModel model;
};

/// Loose 7-fold, tight 7-fold and loose 6-fold phantoms labelled Pa, Pb and Pc.
std::vector<std::pair<std::string, PhantomParams>> default_phantoms();

struct PairAnalysis {
  DiscriminationReport report;
  ComplexField field0;
  ComplexField field1;
  OamDecomposition dec0;
  OamDecomposition dec1;
  MeasurementScheme scheme;
  DetectorImage image0;
  DetectorImage image1;
  OutcomeRegions regions;
};

/// Exit wave of a specimen under plane-wave illumination.
ComplexField exit_wave(const SpecimenModel& specimen, double voltage_kv);

PairAnalysis analyze_pair(const Specimen& a, const Specimen& b, const AnalysisSettings& settings);

/// Detector distributions, regions and physical statistics of an analysed pair.
PairExperiment make_experiment(const PairAnalysis& analysis);

struct Panel {
  std::string name;
  int width;
  int height;
  std::vector<double> values;  // row-major
};

/// Stages of the sorter for one specimen of an analysed pair: Cartesian phase, log-polar phase,
/// per-channel intensity over ln r, and the detector image after flattening and diffraction.
std::vector<Panel> sort_panels(const PairAnalysis& analysis, int hypothesis, const AnalysisSettings& settings);

}  // namespace oamdisc
