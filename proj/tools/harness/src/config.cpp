#include "gig_tools/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "gig/errors.hpp"
#include "json.hpp"

namespace gig::tools {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_unsigned()) throw UsageError(std::string(key) + " must be a non-negative integer");
  }
  if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
    for (const json& e : v) {
      if (!e.is_number_unsigned()) throw UsageError(std::string(key) + " must hold non-negative integers");
    }
  }
  out = v.get<T>();
}

ShortestPathAlgorithm parse_algorithm(const std::string& s) {
  if (s == "dijkstra") return ShortestPathAlgorithm::dijkstra;
  if (s == "astar") return ShortestPathAlgorithm::astar;
  throw UsageError("knn.algorithm must be 'dijkstra' or 'astar'");
}

void apply_document(const json& doc, RunConfig& cfg) {
  check_keys(doc,
             {"dataset", "model", "baseline", "methods", "ig", "gradient_shap", "knn", "energy",
              "benchmark", "eval_points", "threads", "seed", "dump_graph", "dump_paths",
              "dump_energy_trace"},
             "config");
  if (doc.contains("dataset")) {
    const json& d = doc["dataset"];
    check_keys(d, {"n", "noise", "train_fraction", "seed"}, "dataset");
    read(d, "n", cfg.dataset.n);
    read(d, "noise", cfg.dataset.noise);
    read(d, "train_fraction", cfg.dataset.train_fraction);
    read(d, "seed", cfg.dataset.seed);
  }
  read(doc, "seed", cfg.dataset.seed);
  if (doc.contains("model")) {
    const json& m = doc["model"];
    check_keys(m, {"hidden", "epochs", "learning_rate", "momentum", "batch_size"}, "model");
    read(m, "hidden", cfg.model.hidden);
    read(m, "epochs", cfg.model.epochs);
    read(m, "learning_rate", cfg.model.learning_rate);
    read(m, "momentum", cfg.model.momentum);
    read(m, "batch_size", cfg.model.batch_size);
  }
  read(doc, "baseline", cfg.baseline);
  if (doc.contains("methods")) {
    cfg.methods.clear();
    for (const auto& tag : doc["methods"]) {
      const auto m = parse_method(tag.get<std::string>());
      if (!m) throw UsageError("unknown method '" + tag.get<std::string>() + "'");
      cfg.methods.push_back(*m);
    }
  }
  MethodConfig& p = cfg.method_params;
  if (doc.contains("ig")) {
    check_keys(doc["ig"], {"steps"}, "ig");
    read(doc["ig"], "steps", p.ig_steps);
  }
  if (doc.contains("gradient_shap")) {
    check_keys(doc["gradient_shap"], {"samples", "noise_sigma"}, "gradient_shap");
    read(doc["gradient_shap"], "samples", p.shap_samples);
    read(doc["gradient_shap"], "noise_sigma", p.shap_noise_sigma);
  }
  if (doc.contains("knn")) {
    const json& k = doc["knn"];
    check_keys(k, {"k", "m_edge", "m_attr", "algorithm"}, "knn");
    read(k, "k", p.knn.k);
    read(k, "m_edge", p.knn.m_edge);
    read(k, "m_attr", p.knn.m_attr);
    if (k.contains("algorithm")) p.knn.algorithm = parse_algorithm(k["algorithm"].get<std::string>());
  }
  if (doc.contains("energy")) {
    const json& e = doc["energy"];
    check_keys(e,
               {"n_points", "beta", "repel_gradient", "endpoint_weight", "endpoint_fraction", "iters",
                "learning_rate", "final_lr_fraction", "mc_samples", "init_scale", "temperature",
                "clamp_endpoints", "keep_best", "m_attr"},
               "energy");
    EnergyPathConfig& c = p.energy;
    read(e, "n_points", c.n_points);
    read(e, "beta", c.beta);
    read(e, "repel_gradient", c.repel_gradient);
    read(e, "endpoint_weight", c.endpoint_weight);
    read(e, "endpoint_fraction", c.endpoint_fraction);
    read(e, "iters", c.iters);
    read(e, "learning_rate", c.learning_rate);
    read(e, "final_lr_fraction", c.final_lr_fraction);
    read(e, "mc_samples", c.mc_samples);
    read(e, "init_scale", c.init_scale);
    read(e, "temperature", c.temperature);
    read(e, "clamp_endpoints", c.clamp_endpoints);
    read(e, "keep_best", c.keep_best);
    read(e, "m_attr", p.energy_m_attr);
  }
  if (doc.contains("benchmark")) {
    const json& b = doc["benchmark"];
    check_keys(b, {"noise_grid", "num_seeds", "heatmaps", "mask_curves"}, "benchmark");
    read(b, "noise_grid", cfg.benchmark.noise_grid);
    read(b, "num_seeds", cfg.benchmark.num_seeds);
    read(b, "heatmaps", cfg.benchmark.heatmaps);
    read(b, "mask_curves", cfg.benchmark.mask_curves);
  }
  read(doc, "eval_points", cfg.eval_points);
  read(doc, "threads", cfg.threads);
  read(doc, "dump_graph", cfg.dump_graph);
  read(doc, "dump_paths", cfg.dump_paths);
  read(doc, "dump_energy_trace", cfg.dump_energy_trace);
}

}  // namespace

std::vector<Method> default_methods() {
  return {Method::ig,          Method::input_x_gradient, Method::gradient_shap, Method::occlusion,
          Method::enhanced_ig, Method::random,           Method::geodesic_knn};
}

MethodConfig RunConfig::method_config(Method m) const {
  MethodConfig c = method_params;
  c.method = m;
  c.seed = dataset.seed;
  c.energy.seed = dataset.seed;
  return c;
}

void RunConfig::validate() const {
  if (dataset.n < 4) throw UsageError("dataset.n must be >= 4");
  if (!(dataset.noise >= 0.0)) throw UsageError("dataset.noise must be >= 0");
  if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0)) {
    throw UsageError("dataset.train_fraction must lie in (0, 1)");
  }
  if (model.batch_size == 0) throw UsageError("model.batch_size must be >= 1");
  for (std::size_t h : model.hidden) {
    if (h == 0) throw UsageError("model.hidden sizes must be >= 1");
  }
  if (baseline.size() != 2) throw UsageError("baseline must have 2 coordinates");
  if (methods.empty()) throw UsageError("no methods selected");
  const auto& grid = benchmark.noise_grid;
  if (grid.size() < 2) throw UsageError("benchmark.noise_grid needs >= 2 values");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw UsageError("benchmark.noise_grid must be increasing");
  }
  if (grid.front() < 0.0) throw UsageError("benchmark.noise_grid must be >= 0");
  if (benchmark.num_seeds == 0) throw UsageError("benchmark.num_seeds must be >= 1");
  const std::size_t n_test =
      dataset.n - static_cast<std::size_t>(static_cast<double>(dataset.n) * dataset.train_fraction);
  for (Method m : methods) {
    try {
      method_config(m).validate();
    } catch (const gig::Error& e) {
      throw UsageError(std::string(method_name(m)) + ": " + e.what());
    }
    if ((m == Method::geodesic_knn || m == Method::enhanced_ig) && method_params.knn.k >= n_test) {
      throw UsageError("knn.k must be smaller than the number of test points");
    }
  }
}

RunConfig parse_config(const std::string& json_text) {
  RunConfig cfg;
  cfg.methods = default_methods();
  try {
    apply_document(json::parse(json_text), cfg);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read config " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<Method> parse_method_list(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string tag;
  while (std::getline(ss, tag, ',')) {
    if (tag.empty()) continue;
    const auto m = parse_method(tag);
    if (!m) throw UsageError("unknown method '" + tag + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw UsageError("--methods is empty");
  return out;
}

}  // namespace gig::tools
