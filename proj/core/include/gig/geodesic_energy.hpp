#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gig/diffnet.hpp"
#include "gig/path.hpp"
#include "gig/types.hpp"

namespace gig {

/// Knobs of the energy-based path refinement. All defaults are tunable.
struct EnergyPathConfig {
  std::size_t n_points = 16;
  /// Weight of the gradient-norm term in the energy.
  double beta = 0.3;
  /// false: E = sum d - beta sum c, the path is drawn towards large gradients.
  /// true:  E = sum d + beta sum c, the path is pushed away from them.
  bool repel_gradient = false;
  /// Extra distance weight on the first/last `endpoint_fraction` of points.
  double endpoint_weight = 10.0;
  double endpoint_fraction = 0.10;
  std::size_t iters = 300;
  double learning_rate = 0.01;
  /// The step size follows a cosine schedule from learning_rate down to
  /// learning_rate * final_lr_fraction over `iters` steps.
  double final_lr_fraction = 0.01;
  std::size_t mc_samples = 4;
  std::uint64_t seed = 0;
  /// Initial per-coordinate standard deviation of the guide.
  double init_scale = 0.1;
  /// Target density is proportional to exp(-E / temperature).
  double temperature = 0.01;
  /// Pin the first and last point exactly instead of relying on the
  /// endpoint term.
  bool clamp_endpoints = false;
  /// Return the lowest-energy mean path seen (the straight line counts as
  /// iterate 0) instead of the last one.
  bool keep_best = true;

  /// Throws ArgumentError on out-of-range values.
  void validate() const;
};

/// Factorised normal guide over per-point deviations from the straight line,
/// plus the optimiser's moment estimates.
struct VariationalPathState {
  Points gamma0;
  Points mu;
  /// log of the per-coordinate scales; sigma = exp(log_sigma) > 0.
  Points log_sigma;
  Points adam_m_mu, adam_v_mu, adam_m_rho, adam_v_rho;
  std::size_t step = 0;
  std::mt19937_64 rng;

  static VariationalPathState initial(std::span<const double> baseline,
                                      std::span<const double> input,
                                      const EnergyPathConfig& config);

  Points sigma() const;
  /// gamma0 + mu
  Points mean_path() const;
};

/// Indices counted as endpoints: the first and last ceil(fraction * n).
std::vector<bool> endpoint_mask(std::size_t n, double fraction);

/// sum_i ||g_i - g0_i|| - beta sum_i ||grad f(g_i)|| + w sum_{i in ends} ||g_i - g0_i||
/// A negative beta flips the sign of the gradient term.
double energy(const MlpModel& model, const ScalarTarget& target, const Points& path,
              const Points& gamma0, double beta, double endpoint_weight,
              double endpoint_fraction);

/// dE/dgamma_i for every point (exact, using the input Hessian).
Points energy_gradient(const MlpModel& model, const ScalarTarget& target, const Points& path,
                       const Points& gamma0, double beta, double endpoint_weight,
                       double endpoint_fraction);

/// Monte-Carlo ELBO and its gradient for fixed standard-normal draws
/// `noise[s][i][c]`:
///   ELBO = mean_s[-E(gamma0 + mu + sigma * eps_s)] / T + sum log sigma.
struct ElboEstimate {
  double elbo = 0.0;
  Points grad_mu;
  Points grad_log_sigma;
};
ElboEstimate elbo_estimate(const VariationalPathState& state, const MlpModel& model,
                           const ScalarTarget& target, const EnergyPathConfig& config,
                           const std::vector<Points>& noise);

/// One Adam ascent step on the ELBO with fresh draws from the state's RNG.
/// Throws DivergenceError when the estimate is not finite.
struct ElboStepResult {
  VariationalPathState state;
  double elbo = 0.0;
};
ElboStepResult elbo_step(VariationalPathState state, const MlpModel& model,
                         const ScalarTarget& target, const EnergyPathConfig& config);

struct EnergyTraceRow {
  std::size_t iter = 0;
  double elbo = 0.0;
  double energy_mean_path = 0.0;
  double endpoint_drift = 0.0;
};

struct EnergyPathResult {
  Path path;
  VariationalPathState state;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  /// Iteration whose mean path was returned; 0 is the straight line.
  std::size_t best_iter = 0;
  /// max distance of the first/last anchor from baseline/input.
  double endpoint_drift = 0.0;
  /// Set when endpoint_drift exceeds 1e-2 * ||input - baseline||.
  bool endpoint_drift_warning = false;
  std::vector<EnergyTraceRow> trace;
};

/// Step size used at 0-based iteration `it`.
double scheduled_learning_rate(const EnergyPathConfig& config, std::size_t it);

/// Runs `config.iters` ELBO steps and returns the mean path. When input ==
/// baseline the two-anchor degenerate path is returned unchanged.
EnergyPathResult optimize_path(const MlpModel& model, const ScalarTarget& target,
                               std::span<const double> input, std::span<const double> baseline,
                               const EnergyPathConfig& config, bool record_trace = false);

struct EnergyAttributionResult {
  Attribution attribution;
  EnergyPathResult path;
};

/// Geodesic IG (SVI): path_attribution over the optimised mean path.
EnergyAttributionResult geodesic_ig_energy(const MlpModel& model, const ScalarTarget& target,
                                           std::span<const double> input,
                                           std::span<const double> baseline,
                                           const EnergyPathConfig& config,
                                           std::size_t m_attr = kDefaultStepsPerSegment);

void write_energy_trace_csv(const std::vector<EnergyTraceRow>& trace,
                            const std::filesystem::path& file);

}  // namespace gig
