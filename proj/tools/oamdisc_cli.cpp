// Command-line front end: phantom generation, discrimination reports, sorter images and
// dose-limited Monte Carlo experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "oamdisc/errors.hpp"
#include "oamdisc/export.hpp"
#include "oamdisc/montecarlo.hpp"
#include "oamdisc/pipeline.hpp"
#include "oamdisc/run_config.hpp"

namespace fs = std::filesystem;
using namespace oamdisc;

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string pairs = "first";
};

RunConfig load(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig::defaults() : load_run_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.output_dir = g.out;
  c.validate();
  return c;
}

int thread_count(const Globals& g) {
  if (g.threads > 0) return g.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::pair<std::string, std::string>> selected_pairs(const RunConfig& c, const std::string& sel) {
  if (c.pairs.empty()) throw DomainError("configuration lists no pairs");
  if (sel == "all") return c.pairs;
  if (sel == "first") return {c.pairs.front()};
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(sel);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DomainError("pair selection must look like A:B[,C:D] or 'all'");
    out.emplace_back(item.substr(0, colon), item.substr(colon + 1));
    (void)c.hypothesis(out.back().first);
    (void)c.hypothesis(out.back().second);
  }
  return out;
}

std::string pair_dir_name(const std::pair<std::string, std::string>& p) { return p.first + "_" + p.second; }

std::string dose_name(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "dose_%g", d);
  return buf;
}

PairAnalysis analyze(const RunConfig& c, const std::pair<std::string, std::string>& p, int threads) {
  return analyze_pair(c.build(p.first), c.build(p.second), c.settings(threads));
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path.string(), j.dump(2) + "\n"); }

void print_report(const DiscriminationReport& r) {
  std::printf("%-8s overlap %.6f  p_max(psi) %.6f  p_max(rho) %.6f  p_RS %.6f  p_OAM %.6f\n", r.label.c_str(), r.overlap,
              r.p_max_pure, r.p_max_mixed, r.p_real_space, r.p_oam_physical);
}

int run_reports(const Globals& g, const std::string& pairs, const std::string& stem) {
  const RunConfig c = load(g);
  const int threads = thread_count(g);
  fs::create_directories(c.output_dir);
  std::string csv = report_csv_header(c.thresholds) + "\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : selected_pairs(c, pairs)) {
    const PairAnalysis a = analyze(c, p, threads);
    csv += report_csv_row(a.report) + "\n";
    nlohmann::json j = to_json(a.report);
    j["scheme"] = to_json(a.scheme);
    j["detector_regions"] = to_json(a.regions);
    rows.push_back(std::move(j));
    print_report(a.report);
  }
  const fs::path out(c.output_dir);
  write_file_atomic((out / (stem + ".csv")).string(), csv);
  write_json(out / (stem + ".json"), nlohmann::json{{"reports", rows}});
  return 0;
}

int cmd_sort(const Globals& g) {
  const RunConfig c = load(g);
  const int threads = thread_count(g);
  for (const auto& p : selected_pairs(c, g.pairs)) {
    const PairAnalysis a = analyze(c, p, threads);
    const AnalysisSettings s = c.settings(threads);
    const fs::path dir = fs::path(c.output_dir) / "sort" / pair_dir_name(p);
    fs::create_directories(dir);
    for (int h = 0; h < 2; ++h) {
      const std::string label = h == 0 ? p.first : p.second;
      int stage = 1;
      for (const Panel& panel : sort_panels(a, h, s)) {
        const std::string base = label + "_" + std::to_string(stage++) + "_" + panel.name;
        write_png((dir / (base + ".png")).string(), panel.values, panel.width, panel.height);
        std::ostringstream csv;
        csv << "row,col,value\n";
        char buf[32];
        for (int r = 0; r < panel.height; ++r) {
          for (int col = 0; col < panel.width; ++col) {
            std::snprintf(buf, sizeof buf, "%.17g", panel.values[static_cast<std::size_t>(r) * panel.width + col]);
            csv << r << ',' << col << ',' << buf << '\n';
          }
        }
        write_file_atomic((dir / (base + ".csv")).string(), csv.str());
      }
      const DetectorImage& img = h == 0 ? a.image0 : a.image1;
      write_file_atomic((dir / (label + "_detector_intensity.csv")).string(), detector_image_csv(img));
    }
    std::printf("%s: sorter panels written to %s\n", a.report.label.c_str(), dir.string().c_str());
  }
  return 0;
}

int cmd_mc(const Globals& g) {
  const RunConfig c = load(g);
  const int threads = thread_count(g);
  for (const auto& p : selected_pairs(c, g.pairs)) {
    const PairAnalysis a = analyze(c, p, threads);
    const PairExperiment exp = make_experiment(a);
    const fs::path dir = fs::path(c.output_dir) / "mc" / pair_dir_name(p);
    fs::create_directories(dir);
    const std::vector<CurveRow> curve = success_curve(exp, c.doses, c.seed, c.trials, false, threads);
    nlohmann::json summary{{"pair", a.report.label},
                           {"seed", c.seed},
                           {"trials", c.trials},
                           {"area", exp.area},
                           {"s0", exp.s0},
                           {"s1", exp.s1},
                           {"curve", nlohmann::json::array()},
                           {"examples", nlohmann::json::array()}};
    for (std::size_t d = 0; d < curve.size(); ++d) {
      summary["curve"].push_back(to_json(curve[d]));
      for (int truth = 0; truth < 2; ++truth) {
        const ExperimentConfig cfg{c.doses[d], exp.area, truth, derive_seed(c.seed, d), c.trials, false};
        const OutcomeHistogram hist = sample_detection(truth == 0 ? exp.dist0 : exp.dist1, cfg, 0);
        const Decision dec = classify(hist, exp.regions, exp.priors, exp.s0, exp.s1);
        const std::string base = dose_name(c.doses[d]) + "_truth_" + std::to_string(truth);
        write_file_atomic((dir / (base + ".csv")).string(), histogram_csv(hist, a.image0.m_max, a.image0.n_bins));
        DetectorImage counts{a.image0.m_max, a.image0.n_bins, std::vector<double>(hist.counts.begin(), hist.counts.end()),
                             0.0};
        write_png((dir / (base + ".png")).string(), counts.layout(), counts.n_channels(), counts.n_bins);
        nlohmann::json ex = to_json(hist, dec);
        ex["dose"] = c.doses[d];
        summary["examples"].push_back(std::move(ex));
      }
      std::printf("%s dose %g: N %lld  empirical %.4f  predicted %.4f\n", a.report.label.c_str(), curve[d].dose,
                  curve[d].n, curve[d].empirical, curve[d].predicted);
    }
    write_json(dir / "summary.json", summary);
  }
  return 0;
}

int cmd_phantom(const PhantomParams& params, int n, double fov, double voltage, const std::string& out) {
  const SpecimenModel model = make_phantom(GridSpec(n, fov), params);
  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_potential_map(model, out);
  std::printf("max sigma*V = %.6f rad\n", electron_params(voltage).sigma * model.max_potential());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dose-limited discrimination of weak-phase specimens with an OAM sorter"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Monte Carlo seed (overrides the configuration)");
  app.add_option("--threads", g.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  PhantomParams phantom;
  int grid_n = 512;
  double fov = 180.0;
  double voltage = 300.0;
  std::string map_out;
  auto* ph = app.add_subcommand("phantom", "Write a PMAP1 potential map of a ring phantom");
  ph->add_option("--nfold", phantom.n_fold, "Rotational symmetry order")->check(CLI::PositiveNumber);
  ph->add_option("--ring-radius", phantom.ring_radius, "Outer blob radius (Angstrom)")->check(CLI::PositiveNumber);
  ph->add_option("--sigma", phantom.blob_sigma, "Blob width (Angstrom)")->check(CLI::PositiveNumber);
  ph->add_option("--packing", phantom.packing, "Chain packing in (0, 1]")->check(CLI::Range(0.0, 1.0));
  ph->add_option("--peak", phantom.peak_potential, "Blob peak potential (V Angstrom)");
  ph->add_option("--orientation", phantom.orientation, "Rotation (rad)");
  ph->add_option("--n", grid_n, "Grid side (power of two)")->check(CLI::PositiveNumber);
  ph->add_option("--fov", fov, "Field of view (Angstrom)")->check(CLI::PositiveNumber);
  ph->add_option("--voltage", voltage, "Accelerating voltage (kV)")->check(CLI::PositiveNumber);
  ph->add_option("--out", map_out, "Output map file")->required();

  std::vector<CLI::App*> config_commands{
      app.add_subcommand("discriminate", "Report discrimination figures for selected pairs"),
      app.add_subcommand("sort", "Render the sorter stages for selected pairs"),
      app.add_subcommand("mc", "Run dose-limited Monte Carlo experiments"),
      app.add_subcommand("table", "Report discrimination figures for every configured pair")};
  for (CLI::App* sub : config_commands) {
    sub->add_option("--out", g.out, "Output directory (overrides the configuration)");
    if (sub->get_name() != "table") sub->add_option("--pairs", g.pairs, "'all', 'first' or A:B[,C:D]");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (ph->parsed()) return cmd_phantom(phantom, grid_n, fov, voltage, map_out);
    if (config_commands[0]->parsed()) return run_reports(g, g.pairs, "report");
    if (config_commands[1]->parsed()) return cmd_sort(g);
    if (config_commands[2]->parsed()) return cmd_mc(g);
    if (config_commands[3]->parsed()) return run_reports(g, "all", "table");
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
