#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gig/errors.hpp"
#include "gig_tools/commands.hpp"
#include "gig_tools/config.hpp"

namespace {

namespace fs = std::filesystem;
using gig::tools::RunConfig;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string methods;
  std::string model;
};

void add_common(CLI::App* cmd, Options& o, bool with_model) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Dataset, training and method seed");
  cmd->add_option("--out", o.out, "Existing output directory");
  cmd->add_option("--methods", o.methods, "Comma-separated method list");
  if (with_model) cmd->add_option("--model", o.model, "Model JSON (default OUT/model.json)");
}

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : gig::tools::load_config(o.config);
  if (o.seed) cfg.dataset.seed = *o.seed;
  if (!o.methods.empty()) cfg.methods = gig::tools::parse_method_list(o.methods);
  if (cfg.methods.empty()) cfg.methods = gig::tools::default_methods();
  if (!fs::is_directory(o.out)) throw gig::tools::UsageError("--out " + o.out + " is not a directory");
  cfg.validate();
  return cfg;
}

fs::path model_path(const Options& o) {
  return o.model.empty() ? fs::path(o.out) / "model.json" : fs::path(o.model);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic integrated gradients experiments"};
  app.require_subcommand(1);
  Options o;
  CLI::App* train = app.add_subcommand("train", "Train the two-moons classifier");
  CLI::App* attribute = app.add_subcommand("attribute", "Attribute test points with each method");
  CLI::App* benchmark = app.add_subcommand("benchmark", "Purity sweep over noise levels and seeds");
  CLI::App* axioms = app.add_subcommand("axioms", "Completeness residual summary per method");
  add_common(train, o, false);
  add_common(attribute, o, true);
  add_common(benchmark, o, false);
  add_common(axioms, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve(o);
    if (train->parsed()) gig::tools::cmd_train(cfg, o.out, std::cout);
    if (attribute->parsed()) gig::tools::cmd_attribute(cfg, o.out, model_path(o), std::cout);
    if (benchmark->parsed()) gig::tools::cmd_benchmark(cfg, o.out, std::cout);
    if (axioms->parsed()) gig::tools::cmd_axioms(cfg, o.out, model_path(o), std::cout);
  } catch (const gig::tools::UsageError& e) {
    std::cerr << "gig: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gig: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
