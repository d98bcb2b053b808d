#include "oamdisc/run_config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oamdisc/errors.hpp"

namespace oamdisc {

using nlohmann::json;

RunConfig RunConfig::defaults() {
  RunConfig c;
  for (auto& [label, params] : default_phantoms()) c.hypotheses.push_back(HypothesisSpec{label, params, {}});
  c.pairs = {{"Pa", "Pb"}, {"Pa", "Pc"}, {"Pb", "Pc"}};
  return c;
}

AnalysisSettings RunConfig::settings(int threads) const {
  AnalysisSettings s;
  s.voltage_kv = voltage_kv;
  s.grid = grid();
  s.priors = Priors(p0, p1);
  s.thresholds = thresholds;
  s.m_max = m_max;
  s.n_r = n_r;
  s.sorter = SorterConfig::defaults(s.grid);
  s.sorter.n_u = n_u;
  s.sorter.n_v = n_v;
  if (r_min) s.sorter.r_min = *r_min;
  s.threads = threads;
  return s;
}

const HypothesisSpec& RunConfig::hypothesis(const std::string& label) const {
  for (const HypothesisSpec& h : hypotheses) {
    if (h.label == label) return h;
  }
  throw DomainError("unknown hypothesis label '" + label + "'");
}

Specimen RunConfig::build(const std::string& label) const {
  const HypothesisSpec& h = hypothesis(label);
  if (h.phantom) return Specimen{h.label, make_phantom(grid(), *h.phantom)};
  SpecimenModel model = load_potential_map(h.map_path);
  if (!(model.grid() == grid())) {
    throw DomainError("map " + h.map_path + " does not match the configured grid");
  }
  return Specimen{h.label, std::move(model)};
}

void RunConfig::validate() const {
  if (!(voltage_kv > 0.0)) throw DomainError("voltage_kv must be positive");
  if (!is_power_of_two(grid_n) || grid_n < 16) throw DomainError("grid.n must be a power of two >= 16");
  if (!(fov > 0.0)) throw DomainError("grid.fov must be positive");
  (void)Priors(p0, p1);
  for (double x : thresholds) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("thresholds must lie in (0, 1)");
  }
  for (double d : doses) {
    if (!(d >= 0.0)) throw DomainError("doses must be non-negative");
  }
  if (trials < 1) throw DomainError("trials must be at least 1");
  if (m_max < 0) throw DomainError("decomposition.m_max must be non-negative");
  if (n_r < 2) throw DomainError("decomposition.n_r must be at least 2");
  if (n_u < 2 || n_v < 2 * m_max + 1) throw DomainError("sorter sampling too coarse");
  if (r_min && !(*r_min > 0.0)) throw DomainError("sorter.r_min must be positive");
  std::set<std::string> labels;
  for (const HypothesisSpec& h : hypotheses) {
    if (h.label.empty()) throw DomainError("hypothesis labels must be non-empty");
    if (!labels.insert(h.label).second) throw DomainError("duplicate hypothesis label '" + h.label + "'");
    if (h.phantom.has_value() == !h.map_path.empty()) {
      throw DomainError("hypothesis '" + h.label + "' needs exactly one of phantom or map");
    }
  }
  for (const auto& [a, b] : pairs) {
    if (!labels.count(a) || !labels.count(b)) throw DomainError("pair refers to unknown label");
  }
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw FormatError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw FormatError(where + " has the wrong type");
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw FormatError(where + " must be a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw FormatError(where + " must be an integer");
  return j.get<long long>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + " must be an array");
  std::vector<double> v;
  for (const json& x : j) v.push_back(number(x, where));
  return v;
}

PhantomParams parse_phantom(const json& j, const std::string& where) {
  check_keys(j, {"n_fold", "ring_radius", "blob_sigma", "packing", "peak_potential", "orientation"}, where);
  PhantomParams p;
  if (j.contains("n_fold")) p.n_fold = static_cast<int>(integer(j["n_fold"], where + ".n_fold"));
  if (j.contains("ring_radius")) p.ring_radius = number(j["ring_radius"], where + ".ring_radius");
  if (j.contains("blob_sigma")) p.blob_sigma = number(j["blob_sigma"], where + ".blob_sigma");
  if (j.contains("packing")) p.packing = number(j["packing"], where + ".packing");
  if (j.contains("peak_potential")) p.peak_potential = number(j["peak_potential"], where + ".peak_potential");
  if (j.contains("orientation")) p.orientation = number(j["orientation"], where + ".orientation");
  return p;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root,
             {"voltage_kv", "grid", "hypotheses", "pairs", "priors", "thresholds", "doses", "seed", "trials",
              "decomposition", "sorter", "output_dir"},
             "config");
  RunConfig c = RunConfig::defaults();
  if (root.contains("voltage_kv")) c.voltage_kv = number(root["voltage_kv"], "voltage_kv");
  if (root.contains("grid")) {
    const json& g = root["grid"];
    check_keys(g, {"n", "fov"}, "grid");
    if (g.contains("n")) c.grid_n = static_cast<int>(integer(g["n"], "grid.n"));
    if (g.contains("fov")) c.fov = number(g["fov"], "grid.fov");
  }
  if (root.contains("hypotheses")) {
    const json& hs = root["hypotheses"];
    if (!hs.is_array() || hs.empty()) throw FormatError("hypotheses must be a non-empty array");
    c.hypotheses.clear();
    c.pairs.clear();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const std::string where = "hypotheses[" + std::to_string(i) + "]";
      const json& h = hs[i];
      check_keys(h, {"label", "phantom", "map"}, where);
      if (!h.contains("label")) throw FormatError(where + " needs a label");
      HypothesisSpec spec{get<std::string>(h["label"], where + ".label"), std::nullopt, {}};
      if (h.contains("phantom")) spec.phantom = parse_phantom(h["phantom"], where + ".phantom");
      if (h.contains("map")) {
        std::filesystem::path p = get<std::string>(h["map"], where + ".map");
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        spec.map_path = p.string();
      }
      c.hypotheses.push_back(std::move(spec));
    }
    for (std::size_t i = 0; i + 1 < c.hypotheses.size(); ++i) {
      for (std::size_t k = i + 1; k < c.hypotheses.size(); ++k) {
        c.pairs.emplace_back(c.hypotheses[i].label, c.hypotheses[k].label);
      }
    }
  }
  if (root.contains("pairs")) {
    const json& ps = root["pairs"];
    if (!ps.is_array()) throw FormatError("pairs must be an array");
    c.pairs.clear();
    for (const json& p : ps) {
      if (!p.is_array() || p.size() != 2) throw FormatError("each pair must be a two-element array");
      c.pairs.emplace_back(get<std::string>(p[0], "pairs"), get<std::string>(p[1], "pairs"));
    }
  }
  if (root.contains("priors")) {
    const std::vector<double> pr = numbers(root["priors"], "priors");
    if (pr.size() != 2) throw FormatError("priors must have two entries");
    c.p0 = pr[0];
    c.p1 = pr[1];
  }
  if (root.contains("thresholds")) c.thresholds = numbers(root["thresholds"], "thresholds");
  if (root.contains("doses")) c.doses = numbers(root["doses"], "doses");
  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw FormatError("seed must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("trials")) c.trials = integer(root["trials"], "trials");
  if (root.contains("decomposition")) {
    const json& d = root["decomposition"];
    check_keys(d, {"m_max", "n_r"}, "decomposition");
    if (d.contains("m_max")) c.m_max = static_cast<int>(integer(d["m_max"], "decomposition.m_max"));
    if (d.contains("n_r")) c.n_r = static_cast<int>(integer(d["n_r"], "decomposition.n_r"));
  }
  if (root.contains("sorter")) {
    const json& s = root["sorter"];
    check_keys(s, {"n_u", "n_v", "r_min"}, "sorter");
    if (s.contains("n_u")) c.n_u = static_cast<int>(integer(s["n_u"], "sorter.n_u"));
    if (s.contains("n_v")) c.n_v = static_cast<int>(integer(s["n_v"], "sorter.n_v"));
    if (s.contains("r_min")) c.r_min = number(s["r_min"], "sorter.r_min");
  }
  if (root.contains("output_dir")) c.output_dir = get<std::string>(root["output_dir"], "output_dir");
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace oamdisc
