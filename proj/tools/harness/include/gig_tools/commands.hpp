#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "gig/data.hpp"
#include "gig/diffnet.hpp"
#include "gig/path.hpp"
#include "gig_tools/config.hpp"

namespace gig::tools {

struct TrainedSetup {
  Dataset train;
  Dataset test;
  MlpModel model;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double final_loss = 0.0;
};

/// Generates moons(noise, seed), splits and trains with the config's model
/// parameters.
TrainedSetup train_setup(const RunConfig& cfg, double noise, std::uint64_t seed);

/// Attributions of one method for every input, explaining the probability of
/// the class predicted at the input. Path methods route through a graph over
/// `samples` + baseline. f fields and residuals are always filled.
struct MethodOutput {
  std::vector<Attribution> attributions;
  /// Filled for path methods only.
  std::vector<Path> paths;
};
MethodOutput run_method(const MlpModel& model, Method method, const RunConfig& cfg,
                        const Points& inputs, const Points& samples, std::size_t threads);

/// Rows of the purity sweep, in (method, noise, seed) order.
struct PurityRow {
  Method method;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double purity = 0.0;
};
struct BenchmarkResult {
  std::vector<PurityRow> rows;
  /// AUC over the noise grid per method and seed.
  std::map<Method, std::vector<double>> auc_by_seed;
  std::vector<std::uint64_t> seeds;
};

/// Each command writes into `out`, which must exist. Errors: UsageError for
/// bad input, gig::Error at run time.
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_attribute(const RunConfig& cfg, const std::filesystem::path& out,
                   const std::filesystem::path& model_file, std::ostream& log);
BenchmarkResult cmd_benchmark(const RunConfig& cfg, const std::filesystem::path& out,
                              std::ostream& log);
void cmd_axioms(const RunConfig& cfg, const std::filesystem::path& out,
                const std::filesystem::path& model_file, std::ostream& log);

}  // namespace gig::tools
