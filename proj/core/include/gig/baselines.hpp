#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gig/diffnet.hpp"
#include "gig/geodesic_energy.hpp"
#include "gig/geodesic_knn.hpp"
#include "gig/path.hpp"

namespace gig {

enum class Method {
  ig,
  input_x_gradient,
  gradient_shap,
  occlusion,
  enhanced_ig,
  random,
  geodesic_knn,
  geodesic_svi,
};

std::string_view method_name(Method m);
/// Inverse of method_name; nullopt for unknown tags.
std::optional<Method> parse_method(std::string_view tag);
std::span<const Method> all_methods();

/// Per-method parameters. Only the fields relevant to `method` are read.
struct MethodConfig {
  Method method = Method::ig;
  std::size_t ig_steps = kDefaultStraightSteps;
  std::size_t shap_samples = 64;
  double shap_noise_sigma = 0.0;
  KnnPathConfig knn{};
  EnergyPathConfig energy{};
  std::size_t energy_m_attr = kDefaultStepsPerSegment;
  std::uint64_t seed = 0;

  void validate() const;
};

/// x * grad f(x); residuals are taken against the zero baseline.
Attribution input_x_gradient(const MlpModel& model, const ScalarTarget& target,
                             std::span<const double> x);

/// Mean of (x - b) * grad f(b + a (x - b) + e), a ~ U(0, 1), e ~ N(0, sigma^2 I).
Attribution gradient_shap(const MlpModel& model, const ScalarTarget& target,
                          std::span<const double> x, std::span<const double> baseline,
                          std::size_t n_samples, double noise_sigma, std::uint64_t seed);

/// value_i = f(x) - f(x with x_i replaced by baseline_i).
Attribution occlusion(const MlpModel& model, const ScalarTarget& target,
                      std::span<const double> x, std::span<const double> baseline_value,
                      std::size_t window = 1);

/// kNN + Dijkstra path with Euclidean edge weights; gradients integrated along it.
PathAttributionResult enhanced_ig(const MlpModel& model, const ScalarTarget& target,
                                  std::span<const double> x, std::span<const double> baseline,
                                  const Points& samples, std::size_t k,
                                  std::size_t m_attr = kDefaultStepsPerSegment);

/// i.i.d. N(0, 1) values. f fields stay zero unless filled by the caller.
Attribution random_attribution(std::span<const double> x, std::uint64_t seed);

}  // namespace gig
