#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gig/data.hpp"
#include "gig/types.hpp"

namespace gig {

/// Fully connected layer; `weight` is row-major [out x in].
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  double& w(std::size_t row, std::size_t col) { return weight[row * in + col]; }
  double w(std::size_t row, std::size_t col) const { return weight[row * in + col]; }

  bool operator==(const DenseLayer&) const = default;
};

/// Feed-forward classifier: ReLU between layers, log-softmax head.
///
/// The model is immutable once trained; all evaluation functions below are
/// pure and may be called concurrently.
class MlpModel {
 public:
  MlpModel() = default;
  /// Throws ShapeError unless consecutive layers chain and the head has >= 2
  /// outputs.
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// All weights and biases zero. `sizes` = {input, hidden..., classes}.
  static MlpModel zeros(std::span<const std::size_t> sizes);
  /// He-normal weights, zero biases, seeded.
  static MlpModel random(std::span<const std::size_t> sizes, std::uint64_t seed);

  std::size_t input_dim() const;
  std::size_t num_classes() const;
  std::vector<std::size_t> layer_sizes() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  bool operator==(const MlpModel&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

enum class OutputSpace { probability, log_probability, logit };

/// Selects the scalar function being explained: one class output in one space.
struct ScalarTarget {
  std::size_t class_index = 0;
  OutputSpace space = OutputSpace::probability;
};

/// Raw pre-softmax outputs.
Vec logits(const MlpModel& model, std::span<const double> x);
/// Log-softmax of the logits (length = num_classes).
Vec forward(const MlpModel& model, std::span<const double> x);
std::size_t predict(const MlpModel& model, std::span<const double> x);

/// Probability of the class predicted at `x`: the default attribution target.
ScalarTarget predicted_target(const MlpModel& model, std::span<const double> x,
                              OutputSpace space = OutputSpace::probability);

double scalar_output(const MlpModel& model, std::span<const double> x,
                     const ScalarTarget& target);

/// d f / d x by reverse-mode differentiation, with ReLU'(0) = 0.
Vec input_gradient(const MlpModel& model, std::span<const double> x,
                   const ScalarTarget& target);

struct ValueAndGradient {
  double value = 0.0;
  Vec gradient;
};
ValueAndGradient value_and_gradient(const MlpModel& model, std::span<const double> x,
                                    const ScalarTarget& target);

/// Gradient and the exact input Hessian (row-major d x d). Logits are
/// piecewise linear in x, so H = J^T S J with J the logit Jacobian and S the
/// softmax-space curvature.
struct GradientAndHessian {
  double value = 0.0;
  Vec gradient;
  std::vector<double> hessian;
};
GradientAndHessian gradient_and_hessian(const MlpModel& model, std::span<const double> x,
                                        const ScalarTarget& target);

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpModel model;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

/// Minibatch SGD with momentum on mean cross-entropy. Deterministic given
/// `config.seed`. Throws DivergenceError naming the epoch on a non-finite loss.
TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& config);

double accuracy(const MlpModel& model, const Dataset& data);
double mean_cross_entropy(const MlpModel& model, const Dataset& data);

/// JSON: {"format_version", "activation", "layer_sizes", "weights", "biases"}.
/// Doubles are written in shortest round-trip form, so load(save(m)) == m.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& model, const std::filesystem::path& file);
MlpModel load_model(const std::filesystem::path& file);

}  // namespace gig
