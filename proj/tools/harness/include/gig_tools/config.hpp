#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gig/baselines.hpp"
#include "gig/types.hpp"

namespace gig::tools {

/// Raised for malformed configs and invalid flag values; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetParams {
  std::size_t n = 10000;
  double noise = 0.15;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct ModelParams {
  std::vector<std::size_t> hidden{64, 64};
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 32;
};

struct BenchmarkParams {
  std::vector<double> noise_grid{0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65};
  /// Seeds dataset.seed, dataset.seed + 1, ...
  std::size_t num_seeds = 5;
  bool heatmaps = true;
  bool mask_curves = true;
};

struct RunConfig {
  DatasetParams dataset;
  ModelParams model;
  Vec baseline{-0.5, -0.5};
  std::vector<Method> methods;
  /// Method parameters; `method` is filled per use.
  MethodConfig method_params;
  BenchmarkParams benchmark;
  /// Test points attributed by `attribute` / `axioms`; 0 means all.
  std::size_t eval_points = 0;
  /// Worker threads for sweeps; 0 means hardware concurrency.
  std::size_t threads = 0;
  bool dump_graph = false;
  /// Number of inputs whose path is written per path method.
  std::size_t dump_paths = 0;
  bool dump_energy_trace = false;

  /// Parameters for one method with the shared fields applied.
  MethodConfig method_config(Method m) const;
  /// Throws UsageError.
  void validate() const;
};

/// Methods used when neither the config nor --methods names any.
std::vector<Method> default_methods();

/// Defaults overlaid with the JSON file. Unknown keys are rejected.
RunConfig load_config(const std::filesystem::path& file);
RunConfig parse_config(const std::string& json_text);

/// Comma-separated method tags.
std::vector<Method> parse_method_list(const std::string& list);

}  // namespace gig::tools
