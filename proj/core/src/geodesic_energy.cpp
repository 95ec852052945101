#include "gig/geodesic_energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gig/csv.hpp"
#include "gig/errors.hpp"

namespace gig {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_path_pair(const Points& path, const Points& gamma0) {
  if (path.size() != gamma0.size()) {
    throw ArgumentError("path and reference path have different lengths");
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i].size() != gamma0[i].size() || path[i].size() != path.front().size()) {
      throw ShapeError("path points differ in dimension");
    }
  }
}

bool is_clamped(const EnergyPathConfig& config, std::size_t i, std::size_t n) {
  return config.clamp_endpoints && (i == 0 || i + 1 == n);
}

Points zeros_like(const Points& p) {
  Points out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i].assign(p[i].size(), 0.0);
  return out;
}

void adam_update(Points& param, Points& m, Points& v, const Points& grad, double lr,
                 std::size_t step) {
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    for (std::size_t c = 0; c < param[i].size(); ++c) {
      const double g = grad[i][c];
      m[i][c] = kAdamBeta1 * m[i][c] + (1.0 - kAdamBeta1) * g;
      v[i][c] = kAdamBeta2 * v[i][c] + (1.0 - kAdamBeta2) * g * g;
      const double m_hat = m[i][c] / bc1;
      const double v_hat = v[i][c] / bc2;
      // Ascent: the ELBO is maximised.
      param[i][c] += lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
    }
  }
}

double signed_beta(const EnergyPathConfig& config) {
  return config.repel_gradient ? -config.beta : config.beta;
}

double endpoint_drift(const Points& mean, std::span<const double> baseline,
                      std::span<const double> input) {
  return std::max(distance(mean.front(), baseline), distance(mean.back(), input));
}

}  // namespace

void EnergyPathConfig::validate() const {
  if (n_points < 3) throw ArgumentError("n_points must be >= 3");
  if (!(beta >= 0.0)) throw ArgumentError("beta must be >= 0");
  if (!(endpoint_weight >= 0.0)) throw ArgumentError("endpoint_weight must be >= 0");
  if (!(endpoint_fraction > 0.0 && endpoint_fraction < 0.5)) {
    throw ArgumentError("endpoint_fraction must lie in (0, 0.5)");
  }
  if (mc_samples == 0) throw ArgumentError("mc_samples must be >= 1");
  if (!(learning_rate >= 0.0)) throw ArgumentError("learning_rate must be >= 0");
  if (!(init_scale > 0.0)) throw ArgumentError("init_scale must be > 0");
  if (!(temperature > 0.0)) throw ArgumentError("temperature must be > 0");
  if (!(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0)) {
    throw ArgumentError("final_lr_fraction must lie in [0, 1]");
  }
}

VariationalPathState VariationalPathState::initial(std::span<const double> baseline,
                                                   std::span<const double> input,
                                                   const EnergyPathConfig& config) {
  config.validate();
  if (baseline.size() != input.size()) throw ShapeError("input and baseline differ in dimension");
  VariationalPathState s;
  s.gamma0 = interpolate(baseline, input, config.n_points - 1);
  s.mu = zeros_like(s.gamma0);
  s.log_sigma = zeros_like(s.gamma0);
  const double rho0 = std::log(config.init_scale);
  for (Vec& row : s.log_sigma) std::fill(row.begin(), row.end(), rho0);
  s.adam_m_mu = s.adam_v_mu = s.adam_m_rho = s.adam_v_rho = zeros_like(s.gamma0);
  s.rng.seed(config.seed);
  return s;
}

Points VariationalPathState::sigma() const {
  Points out = log_sigma;
  for (Vec& row : out) {
    for (double& v : row) v = std::exp(v);
  }
  return out;
}

Points VariationalPathState::mean_path() const {
  Points out = gamma0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t c = 0; c < out[i].size(); ++c) out[i][c] += mu[i][c];
  }
  return out;
}

std::vector<bool> endpoint_mask(std::size_t n, double fraction) {
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < n; ++i) mask[i] = i < count || i + count >= n;
  return mask;
}

double energy(const MlpModel& model, const ScalarTarget& target, const Points& path,
              const Points& gamma0, double beta, double endpoint_weight,
              double endpoint_fraction) {
  check_path_pair(path, gamma0);
  const std::vector<bool> ends = endpoint_mask(path.size(), endpoint_fraction);
  double dist_sum = 0.0, grad_sum = 0.0, end_sum = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = distance(path[i], gamma0[i]);
    dist_sum += d;
    if (ends[i]) end_sum += d;
    if (beta != 0.0) grad_sum += norm2(input_gradient(model, path[i], target));
  }
  return dist_sum - beta * grad_sum + endpoint_weight * end_sum;
}

Points energy_gradient(const MlpModel& model, const ScalarTarget& target, const Points& path,
                       const Points& gamma0, double beta, double endpoint_weight,
                       double endpoint_fraction) {
  check_path_pair(path, gamma0);
  const std::vector<bool> ends = endpoint_mask(path.size(), endpoint_fraction);
  Points grad = zeros_like(path);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t d = path[i].size();
    const double dist = distance(path[i], gamma0[i]);
    if (dist > 0.0) {
      const double scale = (1.0 + (ends[i] ? endpoint_weight : 0.0)) / dist;
      for (std::size_t c = 0; c < d; ++c) grad[i][c] += scale * (path[i][c] - gamma0[i][c]);
    }
    if (beta == 0.0) continue;
    const GradientAndHessian gh = gradient_and_hessian(model, path[i], target);
    const double gnorm = norm2(gh.gradient);
    if (gnorm == 0.0) continue;
    // d||g|| / dx = H g / ||g||
    for (std::size_t a = 0; a < d; ++a) {
      double hg = 0.0;
      for (std::size_t b = 0; b < d; ++b) hg += gh.hessian[a * d + b] * gh.gradient[b];
      grad[i][a] -= beta * hg / gnorm;
    }
  }
  return grad;
}

ElboEstimate elbo_estimate(const VariationalPathState& state, const MlpModel& model,
                           const ScalarTarget& target, const EnergyPathConfig& config,
                           const std::vector<Points>& noise) {
  if (noise.empty()) throw ArgumentError("ELBO estimate needs at least one noise draw");
  const std::size_t n = state.gamma0.size();
  const Points sigma = state.sigma();
  ElboEstimate out;
  out.grad_mu = zeros_like(state.mu);
  out.grad_log_sigma = zeros_like(state.mu);
  const double inv = 1.0 / (static_cast<double>(noise.size()) * config.temperature);
  double energy_sum = 0.0;
  Points sample = state.gamma0;
  for (const Points& eps : noise) {
    if (eps.size() != n) throw ArgumentError("noise draw has the wrong number of points");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < sample[i].size(); ++c) {
        sample[i][c] = is_clamped(config, i, n)
                           ? state.gamma0[i][c]
                           : state.gamma0[i][c] + state.mu[i][c] + sigma[i][c] * eps[i][c];
      }
    }
    energy_sum += energy(model, target, sample, state.gamma0, signed_beta(config),
                         config.endpoint_weight, config.endpoint_fraction);
    const Points grad = energy_gradient(model, target, sample, state.gamma0, signed_beta(config),
                                        config.endpoint_weight, config.endpoint_fraction);
    for (std::size_t i = 0; i < n; ++i) {
      if (is_clamped(config, i, n)) continue;
      for (std::size_t c = 0; c < sample[i].size(); ++c) {
        out.grad_mu[i][c] -= inv * grad[i][c];
        out.grad_log_sigma[i][c] -= inv * grad[i][c] * eps[i][c] * sigma[i][c];
      }
    }
  }
  double entropy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_clamped(config, i, n)) continue;
    for (std::size_t c = 0; c < state.log_sigma[i].size(); ++c) {
      entropy += state.log_sigma[i][c];
      out.grad_log_sigma[i][c] += 1.0;
    }
  }
  out.elbo = -energy_sum * inv + entropy;
  return out;
}

ElboStepResult elbo_step(VariationalPathState state, const MlpModel& model,
                         const ScalarTarget& target, const EnergyPathConfig& config) {
  config.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Points> noise(config.mc_samples, zeros_like(state.gamma0));
  for (Points& eps : noise) {
    for (Vec& row : eps) {
      for (double& v : row) v = normal(state.rng);
    }
  }
  const ElboEstimate est = elbo_estimate(state, model, target, config, noise);
  if (!std::isfinite(est.elbo)) {
    throw DivergenceError("ELBO became non-finite at step " + std::to_string(state.step));
  }
  if (config.learning_rate > 0.0) {
    ++state.step;
    adam_update(state.mu, state.adam_m_mu, state.adam_v_mu, est.grad_mu, config.learning_rate,
                state.step);
    adam_update(state.log_sigma, state.adam_m_rho, state.adam_v_rho, est.grad_log_sigma,
                config.learning_rate, state.step);
  }
  return {std::move(state), est.elbo};
}

double scheduled_learning_rate(const EnergyPathConfig& config, std::size_t it) {
  if (config.iters <= 1) return config.learning_rate;
  const double t = static_cast<double>(it) / static_cast<double>(config.iters - 1);
  const double lo = config.learning_rate * config.final_lr_fraction;
  return lo + 0.5 * (config.learning_rate - lo) * (1.0 + std::cos(std::numbers::pi * t));
}

EnergyPathResult optimize_path(const MlpModel& model, const ScalarTarget& target,
                               std::span<const double> input, std::span<const double> baseline,
                               const EnergyPathConfig& config, bool record_trace) {
  config.validate();
  EnergyPathResult out;
  out.state = VariationalPathState::initial(baseline, input, config);
  const double scale = distance(input, baseline);
  if (scale == 0.0) {
    out.path.anchors = {Vec(baseline.begin(), baseline.end()), Vec(input.begin(), input.end())};
    return out;
  }
  auto mean_energy = [&](const VariationalPathState& s) {
    return energy(model, target, s.mean_path(), s.gamma0, signed_beta(config),
                  config.endpoint_weight, config.endpoint_fraction);
  };
  out.initial_energy = mean_energy(out.state);
  Points best = out.state.mean_path();
  double best_energy = out.initial_energy;
  EnergyPathConfig step_config = config;
  for (std::size_t it = 0; it < config.iters; ++it) {
    step_config.learning_rate = scheduled_learning_rate(config, it);
    ElboStepResult step = elbo_step(std::move(out.state), model, target, step_config);
    out.state = std::move(step.state);
    const Points mean = out.state.mean_path();
    const double e = mean_energy(out.state);
    if (record_trace) {
      out.trace.push_back({it, step.elbo, e, endpoint_drift(mean, baseline, input)});
    }
    if (!config.keep_best || e < best_energy) {
      best = mean;
      best_energy = e;
      out.best_iter = it + 1;
    }
  }
  out.final_energy = best_energy;
  out.endpoint_drift = endpoint_drift(best, baseline, input);
  out.endpoint_drift_warning = out.endpoint_drift > 1e-2 * scale;
  out.path.anchors = std::move(best);
  return out;
}

EnergyAttributionResult geodesic_ig_energy(const MlpModel& model, const ScalarTarget& target,
                                           std::span<const double> input,
                                           std::span<const double> baseline,
                                           const EnergyPathConfig& config, std::size_t m_attr) {
  EnergyAttributionResult out;
  out.path = optimize_path(model, target, input, baseline, config);
  out.path.path.steps_per_segment = m_attr;
  out.attribution = path_attribution(model, target, out.path.path);
  return out;
}

void write_energy_trace_csv(const std::vector<EnergyTraceRow>& trace,
                            const std::filesystem::path& file) {
  CsvWriter csv(file, "iter,elbo,energy_mean_path,endpoint_drift");
  for (const EnergyTraceRow& row : trace) {
    csv.field(row.iter).field(row.elbo).field(row.energy_mean_path).field(row.endpoint_drift);
    csv.end_row();
  }
}

}  // namespace gig
