#include "oamdisc/pipeline.hpp"

#include <algorithm>
#include <future>

#include "oamdisc/errors.hpp"

namespace oamdisc {

std::vector<std::pair<std::string, PhantomParams>> default_phantoms() {
  PhantomParams pa;
  pa.n_fold = 7;
  pa.packing = 0.5;
  PhantomParams pb = pa;
  pb.packing = 1.0;
  PhantomParams pc = pa;
  pc.n_fold = 6;
  return {{"Pa", pa}, {"Pb", pb}, {"Pc", pc}};
}

ComplexField exit_wave(const SpecimenModel& specimen, double voltage_kv) {
  return interact(plane_wave(specimen.grid()), specimen, electron_params(voltage_kv));
}

namespace {

struct Side {
  ComplexField field;
  OamDecomposition dec;
};

Side prepare(const Specimen& s, const AnalysisSettings& settings, const RadialGrid& rg) {
  if (!(s.model.grid() == settings.grid)) throw DomainError("specimen " + s.label + " does not use the configured grid");
  ComplexField field = exit_wave(s.model, settings.voltage_kv);
  OamDecomposition dec = oam_decompose(field, Point2{0.0, 0.0}, settings.m_max, rg);
  return Side{std::move(field), std::move(dec)};
}

}  // namespace

PairAnalysis analyze_pair(const Specimen& a, const Specimen& b, const AnalysisSettings& settings) {
  const RadialGrid rg = settings.radial_grid();
  const Point2 center{0.0, 0.0};
  auto f0 = std::async(settings.threads > 1 ? std::launch::async : std::launch::deferred,
                       [&] { return prepare(a, settings, rg); });
  Side s1 = prepare(b, settings, rg);
  Side s0 = f0.get();

  const Priors& pr = settings.priors;
  DiscriminationReport r;
  r.label = a.label + ":" + b.label;
  r.priors = pr;
  r.area = settings.grid.area();
  r.thresholds = settings.thresholds;
  r.overlap = overlap_magnitude(s0.dec, s1.dec);
  r.p_max_pure = helstrom_pure(r.overlap, pr);
  r.p_max_mixed = helstrom_mixed(s0.dec, s1.dec, pr);

  const SuccessStats rs = real_space_probability_mixed(s0.field, s1.field, center, rg, pr, true);
  r.p_real_space = rs.p;
  r.s0_real_space = rs.s0;
  r.s1_real_space = rs.s1;
  r.p_real_space_pure = real_space_probability(s0.field, s1.field, pr, true).p;

  MeasurementScheme scheme = optimal_scheme(s0.dec, s1.dec, pr);
  const SuccessStats exact = scheme_probability(scheme, s0.dec, s1.dec, pr);
  r.p_oam_exact = exact.p;
  r.s0 = exact.s0;
  r.s1 = exact.s1;

  DetectorImage image0 = physical_measurement_distribution(s0.dec, scheme, settings.sorter);
  DetectorImage image1 = physical_measurement_distribution(s1.dec, scheme, settings.sorter);
  OutcomeRegions regions = outcome_regions(scheme, settings.sorter);
  const RegionStats phys = region_statistics(image0, image1, regions);
  r.s0_physical = phys.s0;
  r.s1_physical = phys.s1;
  // An undetected electron is a further outcome, assigned to the likelier hypothesis.
  r.p_oam_physical = pr.p0() * phys.s0 * image0.total() + pr.p1() * phys.s1 * image1.total() +
                     std::max(pr.p0() * (1.0 - image0.total()), pr.p1() * (1.0 - image1.total()));

  for (double x : settings.thresholds) {
    r.n_min_oam.push_back(try_n_min(r.s0_physical, r.s1_physical, pr, x));
    r.n_min_oam_exact.push_back(try_n_min(r.s0, r.s1, pr, x));
    r.n_min_real_space.push_back(try_n_min(r.s0_real_space, r.s1_real_space, pr, x));
    const auto& n = r.n_min_oam.back();
    r.dose.push_back(n ? std::optional<double>(static_cast<double>(*n) / r.area) : std::nullopt);
  }

  return PairAnalysis{std::move(r),   std::move(s0.field), std::move(s1.field), std::move(s0.dec),
                      std::move(s1.dec), std::move(scheme), std::move(image0),   std::move(image1),
                      std::move(regions)};
}

PairExperiment make_experiment(const PairAnalysis& a) {
  return PairExperiment{a.image0.intensity, a.image1.intensity, a.regions.outcome, a.report.priors,
                        a.report.s0_physical, a.report.s1_physical, a.report.area};
}

std::vector<Panel> sort_panels(const PairAnalysis& a, int hypothesis, const AnalysisSettings& settings) {
  if (hypothesis != 0 && hypothesis != 1) throw DomainError("hypothesis must be 0 or 1");
  const ComplexField& field = hypothesis == 0 ? a.field0 : a.field1;
  const DetectorImage& image = hypothesis == 0 ? a.image0 : a.image1;
  const GridSpec& g = field.grid();
  std::vector<Panel> panels;

  Panel cart{"cartesian_phase", g.n(), g.n(), std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) cart.values[i] = std::arg(field.values()[i]);
  panels.push_back(std::move(cart));

  const SorterConfig& sc = settings.sorter;
  const LogPolarField lp =
      log_polar_unwrap(field, a.dec0.center, sc.r_min, a.dec0.radial_grid.r_max(), sc.n_u, sc.n_v);
  Panel lpp{"log_polar_phase", sc.n_v, sc.n_u, std::vector<double>(lp.values.size())};
  for (std::size_t i = 0; i < lp.values.size(); ++i) lpp.values[i] = std::arg(lp.values[i]);
  panels.push_back(std::move(lpp));

  const auto channels = separate_channels(lp);
  const int cols = 2 * settings.m_max + 1;
  Panel chan{"channel_intensity", cols, sc.n_u, std::vector<double>(static_cast<std::size_t>(cols) * sc.n_u, 0.0)};
  for (int m = -settings.m_max; m <= settings.m_max; ++m) {
    auto it = channels.find(m);
    if (it == channels.end()) continue;
    for (int j = 0; j < sc.n_u; ++j) {
      chan.values[static_cast<std::size_t>(j) * cols + (m + settings.m_max)] = std::norm(it->second.values[j]);
    }
  }
  panels.push_back(std::move(chan));

  panels.push_back(Panel{"detector", image.n_channels(), image.n_bins, image.layout()});
  return panels;
}

}  // namespace oamdisc
