#include "gig_tools/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "gig/baselines.hpp"
#include "gig/csv.hpp"
#include "gig/errors.hpp"
#include "gig/evalmetrics.hpp"
#include "gig/geodesic_energy.hpp"
#include "gig/geodesic_knn.hpp"
#include "gig_tools/pool.hpp"
#include "gig_tools/svg.hpp"

namespace gig::tools {

namespace {

namespace fs = std::filesystem;

const char* kAttributionHeader =
    "input_id,feature_index,value,f_input,f_baseline,completeness_residual,"
    "strong_completeness_residual,method";

// splitmix64 finaliser: independent streams from (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void require_dir(const fs::path& out) {
  if (!fs::is_directory(out)) throw UsageError("output directory " + out.string() + " does not exist");
}

std::vector<std::size_t> layer_sizes(const RunConfig& cfg) {
  std::vector<std::size_t> sizes{2};
  sizes.insert(sizes.end(), cfg.model.hidden.begin(), cfg.model.hidden.end());
  sizes.push_back(2);
  return sizes;
}

Points eval_inputs(const RunConfig& cfg, const Dataset& test) {
  const std::size_t n = cfg.eval_points == 0 ? test.size() : std::min(cfg.eval_points, test.size());
  return Points(test.points.begin(), test.points.begin() + static_cast<std::ptrdiff_t>(n));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void write_attributions(const fs::path& file, Method m, const std::vector<Attribution>& attrs) {
  CsvWriter csv(file, kAttributionHeader);
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const Attribution& a = attrs[i];
    for (std::size_t f = 0; f < a.values.size(); ++f) {
      csv.field(i).field(f).field(a.values[f]).field(a.f_input).field(a.f_baseline);
      csv.field(a.completeness_residual).field(a.strong_completeness_residual).field(method_name(m));
      csv.end_row();
    }
  }
}

MlpModel load_or_usage(const fs::path& model_file) {
  if (!fs::exists(model_file)) throw UsageError("model file " + model_file.string() + " not found");
  return load_model(model_file);
}

}  // namespace

TrainedSetup train_setup(const RunConfig& cfg, double noise, std::uint64_t seed) {
  const Dataset ds = make_moons(cfg.dataset.n, noise, seed);
  auto [train_set, test_set] = split(ds, cfg.dataset.train_fraction, seed);
  TrainConfig tc;
  tc.epochs = cfg.model.epochs;
  tc.learning_rate = cfg.model.learning_rate;
  tc.momentum = cfg.model.momentum;
  tc.batch_size = cfg.model.batch_size;
  tc.seed = seed;
  const std::vector<std::size_t> sizes = layer_sizes(cfg);
  TrainResult r = train(MlpModel::random(sizes, seed), train_set, tc);
  TrainedSetup s;
  s.model = std::move(r.model);
  s.train_accuracy = r.train_accuracy;
  s.final_loss = r.final_loss;
  s.test_accuracy = accuracy(s.model, test_set);
  s.train = std::move(train_set);
  s.test = std::move(test_set);
  return s;
}

MethodOutput run_method(const MlpModel& model, Method method, const RunConfig& cfg,
                        const Points& inputs, const Points& samples, std::size_t threads) {
  const MethodConfig mc = cfg.method_config(method);
  mc.validate();
  const Vec& b = cfg.baseline;
  const std::size_t n = inputs.size();
  std::vector<ScalarTarget> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = predicted_target(model, inputs[i]);

  MethodOutput out;
  out.attributions.resize(n);
  if (method == Method::geodesic_knn || method == Method::enhanced_ig) {
    const EdgeRule rule = method == Method::geodesic_knn ? EdgeRule::gradient : EdgeRule::euclidean;
    auto results = explain_knn_batch(model, targets, inputs, b, samples, mc.knn, rule);
    for (std::size_t i = 0; i < n; ++i) {
      out.attributions[i] = std::move(results[i].attribution);
      out.paths.push_back(std::move(results[i].path));
    }
    return out;
  }
  if (method == Method::geodesic_svi) out.paths.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const Vec& x = inputs[i];
    const ScalarTarget& t = targets[i];
    switch (method) {
      case Method::ig:
        out.attributions[i] = integrated_gradients(model, t, x, b, mc.ig_steps);
        break;
      case Method::input_x_gradient:
        out.attributions[i] = input_x_gradient(model, t, x);
        break;
      case Method::gradient_shap:
        out.attributions[i] = gradient_shap(model, t, x, b, mc.shap_samples, mc.shap_noise_sigma,
                                            derive_seed(mc.seed, i));
        break;
      case Method::occlusion:
        out.attributions[i] = occlusion(model, t, x, b);
        break;
      case Method::random: {
        Attribution a = random_attribution(x, derive_seed(mc.seed, i));
        out.attributions[i] = make_attribution(std::move(a.values), scalar_output(model, x, t),
                                               scalar_output(model, b, t));
        break;
      }
      case Method::geodesic_svi: {
        EnergyPathConfig ec = mc.energy;
        ec.seed = derive_seed(mc.seed, i);
        EnergyAttributionResult r = geodesic_ig_energy(model, t, x, b, ec, mc.energy_m_attr);
        out.attributions[i] = std::move(r.attribution);
        out.paths[i] = std::move(r.path.path);
        break;
      }
      default:
        throw Error("unhandled method");
    }
  });
  return out;
}

void cmd_train(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  cfg.validate();
  require_dir(out);
  const TrainedSetup s = train_setup(cfg, cfg.dataset.noise, cfg.dataset.seed);
  save_model(s.model, out / "model.json");
  write_dataset_csv(make_moons(cfg.dataset.n, cfg.dataset.noise, cfg.dataset.seed),
                    out / "dataset.csv");
  CsvWriter csv(out / "train_report.csv", "seed,train_accuracy,test_accuracy,final_loss");
  csv.field(static_cast<long long>(cfg.dataset.seed))
      .field(s.train_accuracy)
      .field(s.test_accuracy)
      .field(s.final_loss);
  csv.end_row();
  log << "train: seed=" << cfg.dataset.seed << " train_accuracy=" << format_double(s.train_accuracy)
      << " test_accuracy=" << format_double(s.test_accuracy)
      << " loss=" << format_double(s.final_loss) << "\n";
}

void cmd_attribute(const RunConfig& cfg, const fs::path& out, const fs::path& model_file,
                   std::ostream& log) {
  cfg.validate();
  require_dir(out);
  const MlpModel model = load_or_usage(model_file);
  const Dataset ds = make_moons(cfg.dataset.n, cfg.dataset.noise, cfg.dataset.seed);
  const Dataset test = split(ds, cfg.dataset.train_fraction, cfg.dataset.seed).second;
  const Points inputs = eval_inputs(cfg, test);
  const std::size_t threads = resolve_threads(cfg.threads);
  for (Method m : cfg.methods) {
    const MethodOutput r = run_method(model, m, cfg, inputs, test.points, threads);
    write_attributions(out / ("attributions_" + std::string(method_name(m)) + ".csv"), m,
                       r.attributions);
    const std::size_t dumps = std::min(cfg.dump_paths, r.paths.size());
    if (dumps > 0) fs::create_directories(out / "paths");
    for (std::size_t i = 0; i < dumps; ++i) {
      write_path_csv(r.paths[i], out / "paths" /
                                     (std::string(method_name(m)) + "_" + std::to_string(i) + ".csv"));
    }
    log << "attribute: " << method_name(m) << " " << inputs.size() << " inputs\n";
  }
  if (cfg.dump_graph) {
    Points nodes = test.points;
    nodes.push_back(cfg.baseline);
    const ScalarTarget t{1, OutputSpace::probability};
    const MethodConfig mc = cfg.method_config(Method::geodesic_knn);
    const GeodesicGraph g = build_geodesic_graph(nodes, mc.knn.k, mc.knn.m_edge,
                                                 gradient_edge_weight(model, t, mc.knn.m_edge));
    write_graph_csv(g, out / "graph.csv");
  }
  if (cfg.dump_energy_trace && !inputs.empty()) {
    EnergyPathConfig ec = cfg.method_config(Method::geodesic_svi).energy;
    ec.seed = derive_seed(ec.seed, 0);
    const EnergyPathResult r =
        optimize_path(model, predicted_target(model, inputs[0]), inputs[0], cfg.baseline, ec, true);
    write_energy_trace_csv(r.trace, out / "energy_trace.csv");
  }
}

BenchmarkResult cmd_benchmark(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  cfg.validate();
  require_dir(out);
  const auto& grid = cfg.benchmark.noise_grid;
  BenchmarkResult result;
  for (std::size_t s = 0; s < cfg.benchmark.num_seeds; ++s) result.seeds.push_back(cfg.dataset.seed + s);
  const std::size_t n_seeds = result.seeds.size();
  const std::size_t n_cells = grid.size() * n_seeds;
  const std::size_t n_methods = cfg.methods.size();

  // Representative cell for figures and mask curves: the configured noise if
  // it is on the grid, else the first grid value; always the first seed.
  std::size_t figure_noise = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (std::abs(grid[g] - cfg.dataset.noise) < 1e-12) figure_noise = g;
  }

  struct Figures {
    Points points;
    std::vector<std::vector<Attribution>> attributions;  // per method
    MlpModel model;
  };
  std::vector<std::vector<double>> purity(n_cells, std::vector<double>(n_methods));
  Figures figures;
  // Cells in parallel; methods inside a cell run serially.
  parallel_for(n_cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t g = cell / n_seeds, s = cell % n_seeds;
    const TrainedSetup setup = train_setup(cfg, grid[g], result.seeds[s]);
    RunConfig cell_cfg = cfg;
    cell_cfg.dataset.seed = result.seeds[s];
    const bool keep = g == figure_noise && s == 0;
    std::vector<std::vector<Attribution>> kept;
    for (std::size_t m = 0; m < n_methods; ++m) {
      MethodOutput r = run_method(setup.model, cfg.methods[m], cell_cfg, setup.test.points,
                                  setup.test.points, 1);
      std::vector<Vec> values;
      values.reserve(r.attributions.size());
      for (const Attribution& a : r.attributions) values.push_back(a.values);
      purity[cell][m] = gig::purity(setup.model, values, setup.test.points);
      if (keep) kept.push_back(std::move(r.attributions));
    }
    if (keep) figures = {setup.test.points, std::move(kept), setup.model};
  });

  CsvWriter rows(out / "purity.csv", "method,noise,seed,purity");
  for (std::size_t m = 0; m < n_methods; ++m) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const double p = purity[g * n_seeds + s][m];
        result.rows.push_back({cfg.methods[m], grid[g], result.seeds[s], p});
        rows.field(method_name(cfg.methods[m])).field(grid[g]);
        rows.field(static_cast<long long>(result.seeds[s])).field(p);
        rows.end_row();
      }
    }
  }

  CsvWriter summary(out / "summary.csv", "method,auc_purity,stderr");
  CsvWriter per_seed(out / "auc_by_seed.csv", "method,seed,auc_purity");
  std::vector<Series> series;
  for (std::size_t m = 0; m < n_methods; ++m) {
    std::vector<double> aucs;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      std::vector<double> curve;
      for (std::size_t g = 0; g < grid.size(); ++g) curve.push_back(purity[g * n_seeds + s][m]);
      aucs.push_back(purity_auc(grid, curve));
      per_seed.field(method_name(cfg.methods[m])).field(static_cast<long long>(result.seeds[s]));
      per_seed.field(aucs.back());
      per_seed.end_row();
    }
    const double mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / static_cast<double>(n_seeds);
    double var = 0.0;
    for (double a : aucs) var += (a - mean) * (a - mean);
    const double stderr_ =
        n_seeds > 1 ? std::sqrt(var / static_cast<double>(n_seeds - 1) / static_cast<double>(n_seeds))
                    : 0.0;
    summary.field(method_name(cfg.methods[m])).field(mean).field(stderr_);
    summary.end_row();
    result.auc_by_seed[cfg.methods[m]] = aucs;

    Series line{std::string(method_name(cfg.methods[m])), {}, {}};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double mu = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) mu += purity[g * n_seeds + s][m];
      mu /= static_cast<double>(n_seeds);
      double v = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const double d = purity[g * n_seeds + s][m] - mu;
        v += d * d;
      }
      line.y.push_back(mu);
      line.err.push_back(n_seeds > 1 ? std::sqrt(v / static_cast<double>(n_seeds - 1) /
                                                 static_cast<double>(n_seeds))
                                     : 0.0);
    }
    series.push_back(std::move(line));
  }
  write_line_chart_svg(out / "purity_vs_noise.svg", "Purity vs noise", "noise sigma",
                       "purity (mean +/- s.e.)", grid, series);

  if (cfg.benchmark.mask_curves) {
    CsvWriter mask(out / "mask_curve.csv", "method,k_percent,comprehensiveness,log_odds");
    const std::vector<double> ks = default_k_grid();
    for (std::size_t m = 0; m < n_methods; ++m) {
      for (double k : ks) {
        double comp = 0.0, lo = 0.0;
        for (std::size_t i = 0; i < figures.points.size(); ++i) {
          const Vec& x = figures.points[i];
          const ScalarTarget t = predicted_target(figures.model, x);
          const Vec& a = figures.attributions[m][i].values;
          comp += comprehensiveness(figures.model, t, x, a, k, cfg.baseline);
          lo += log_odds(figures.model, t, x, a, k, cfg.baseline);
        }
        const double count = static_cast<double>(figures.points.size());
        mask.field(method_name(cfg.methods[m])).field(k).field(comp / count).field(lo / count);
        mask.end_row();
      }
    }
  }
  if (cfg.benchmark.heatmaps) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      std::vector<std::vector<double>> panels(2);
      for (const Attribution& a : figures.attributions[m]) {
        panels[0].push_back(a.values[0]);
        panels[1].push_back(a.values[1]);
      }
      const std::string name(method_name(cfg.methods[m]));
      write_heatmap_svg(out / ("heatmap_" + name + ".svg"),
                        name + " attributions (noise " + format_double(grid[figure_noise]) + ")",
                        figures.points, panels, {"feature x0", "feature x1"});
    }
  }
  for (std::size_t m = 0; m < n_methods; ++m) {
    const auto& a = result.auc_by_seed[cfg.methods[m]];
    log << "benchmark: " << method_name(cfg.methods[m]) << " auc_purity="
        << format_double(std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size()))
        << "\n";
  }
  return result;
}

void cmd_axioms(const RunConfig& cfg, const fs::path& out, const fs::path& model_file,
                std::ostream& log) {
  cfg.validate();
  require_dir(out);
  const MlpModel model = load_or_usage(model_file);
  const Dataset ds = make_moons(cfg.dataset.n, cfg.dataset.noise, cfg.dataset.seed);
  const Dataset test = split(ds, cfg.dataset.train_fraction, cfg.dataset.seed).second;
  const Points inputs = eval_inputs(cfg, test);
  const std::size_t threads = resolve_threads(cfg.threads);
  CsvWriter csv(out / "axioms.csv",
                "method,n,median_completeness_residual,p95_completeness_residual,"
                "median_strong_completeness_residual,p95_strong_completeness_residual,"
                "median_abs_delta_f,p95_abs_delta_f");
  for (Method m : cfg.methods) {
    const MethodOutput r = run_method(model, m, cfg, inputs, test.points, threads);
    std::vector<double> comp, strong, delta;
    for (const Attribution& a : r.attributions) {
      comp.push_back(a.completeness_residual);
      strong.push_back(a.strong_completeness_residual);
      delta.push_back(std::abs(a.f_input - a.f_baseline));
    }
    csv.field(method_name(m)).field(r.attributions.size());
    csv.field(quantile(comp, 0.5)).field(quantile(comp, 0.95));
    csv.field(quantile(strong, 0.5)).field(quantile(strong, 0.95));
    csv.field(quantile(delta, 0.5)).field(quantile(delta, 0.95));
    csv.end_row();
    log << "axioms: " << method_name(m) << " median_completeness="
        << format_double(quantile(comp, 0.5))
        << " median_strong=" << format_double(quantile(strong, 0.5)) << "\n";
  }
}

}  // namespace gig::tools
