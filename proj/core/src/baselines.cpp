#include "gig/baselines.hpp"

#include <array>
#include <random>

#include "gig/errors.hpp"

namespace gig {

namespace {

constexpr std::array kMethods = {
    Method::ig,          Method::input_x_gradient, Method::gradient_shap, Method::occlusion,
    Method::enhanced_ig, Method::random,           Method::geodesic_knn,  Method::geodesic_svi,
};

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ig: return "ig";
    case Method::input_x_gradient: return "input_x_gradient";
    case Method::gradient_shap: return "gradient_shap";
    case Method::occlusion: return "occlusion";
    case Method::enhanced_ig: return "enhanced_ig";
    case Method::random: return "random";
    case Method::geodesic_knn: return "geodesic_knn";
    case Method::geodesic_svi: return "geodesic_svi";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view tag) {
  for (Method m : kMethods) {
    if (method_name(m) == tag) return m;
  }
  return std::nullopt;
}

std::span<const Method> all_methods() { return kMethods; }

void MethodConfig::validate() const {
  switch (method) {
    case Method::ig:
      if (ig_steps == 0) throw ArgumentError("ig needs steps >= 1");
      break;
    case Method::gradient_shap:
      if (shap_samples == 0) throw ArgumentError("gradient_shap needs n_samples >= 1");
      if (!(shap_noise_sigma >= 0.0)) throw ArgumentError("gradient_shap noise must be >= 0");
      break;
    case Method::enhanced_ig:
    case Method::geodesic_knn:
      if (knn.k == 0) throw ArgumentError("kNN methods need k >= 1");
      if (knn.m_edge == 0 || knn.m_attr == 0) throw ArgumentError("kNN step counts must be >= 1");
      break;
    case Method::geodesic_svi:
      energy.validate();
      if (energy_m_attr == 0) throw ArgumentError("geodesic_svi needs m_attr >= 1");
      break;
    default:
      break;
  }
}

Attribution input_x_gradient(const MlpModel& model, const ScalarTarget& target,
                             std::span<const double> x) {
  const ValueAndGradient vg = value_and_gradient(model, x, target);
  Vec values(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) values[i] = x[i] * vg.gradient[i];
  const Vec zero(x.size(), 0.0);
  return make_attribution(std::move(values), vg.value, scalar_output(model, zero, target));
}

Attribution gradient_shap(const MlpModel& model, const ScalarTarget& target,
                          std::span<const double> x, std::span<const double> baseline,
                          std::size_t n_samples, double noise_sigma, std::uint64_t seed) {
  if (n_samples == 0) throw ArgumentError("gradient_shap needs n_samples >= 1");
  if (x.size() != baseline.size()) throw ShapeError("input and baseline differ in dimension");
  const std::size_t d = x.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec grad_sum(d, 0.0);
  Vec point(d);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const double alpha = uniform(rng);
    for (std::size_t i = 0; i < d; ++i) {
      const double jitter = noise_sigma > 0.0 ? noise_sigma * normal(rng) : 0.0;
      point[i] = baseline[i] + alpha * (x[i] - baseline[i]) + jitter;
    }
    const Vec g = input_gradient(model, point, target);
    for (std::size_t i = 0; i < d; ++i) grad_sum[i] += g[i];
  }
  Vec values(d);
  for (std::size_t i = 0; i < d; ++i) {
    values[i] = (x[i] - baseline[i]) * grad_sum[i] / static_cast<double>(n_samples);
  }
  return make_attribution(std::move(values), scalar_output(model, x, target),
                          scalar_output(model, baseline, target));
}

Attribution occlusion(const MlpModel& model, const ScalarTarget& target,
                      std::span<const double> x, std::span<const double> baseline_value,
                      std::size_t window) {
  if (window != 1) throw ArgumentError("occlusion supports window = 1 for tabular inputs");
  if (x.size() != baseline_value.size()) throw ShapeError("input and fill differ in dimension");
  const double fx = scalar_output(model, x, target);
  Vec values(x.size());
  Vec masked(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    masked[i] = baseline_value[i];
    values[i] = fx - scalar_output(model, masked, target);
    masked[i] = x[i];
  }
  return make_attribution(std::move(values), fx, scalar_output(model, baseline_value, target));
}

PathAttributionResult enhanced_ig(const MlpModel& model, const ScalarTarget& target,
                                  std::span<const double> x, std::span<const double> baseline,
                                  const Points& samples, std::size_t k, std::size_t m_attr) {
  KnnPathConfig config;
  config.k = k;
  config.m_attr = m_attr;
  return geodesic_ig_knn(model, target, x, baseline, samples, config, EdgeRule::euclidean);
}

Attribution random_attribution(std::span<const double> x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec values(x.size());
  for (double& v : values) v = normal(rng);
  return make_attribution(std::move(values), 0.0, 0.0);
}

}  // namespace gig
