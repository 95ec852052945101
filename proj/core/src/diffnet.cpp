#include "gig/diffnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "gig/errors.hpp"
#include "json.hpp"

namespace gig {

namespace {

constexpr int kModelFormatVersion = 1;

void check_input(const MlpModel& model, std::span<const double> x) {
  if (model.layers().empty()) throw ShapeError("model has no layers");
  if (x.size() != model.input_dim()) {
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(model.input_dim()));
  }
}

void check_target(const MlpModel& model, const ScalarTarget& target) {
  if (target.class_index >= model.num_classes()) {
    throw TargetError("class index " + std::to_string(target.class_index) +
                      " out of range for " + std::to_string(model.num_classes()) + " classes");
  }
}

// Pre-activations of every layer; the last entry holds the logits.
struct Trace {
  std::vector<Vec> pre;
};

void dense(const DenseLayer& layer, std::span<const double> in, Vec& out) {
  out.assign(layer.bias.begin(), layer.bias.end());
  const double* w = layer.weight.data();
  for (std::size_t r = 0; r < layer.out; ++r) {
    double acc = out[r];
    const double* row = w + r * layer.in;
    for (std::size_t c = 0; c < layer.in; ++c) acc += row[c] * in[c];
    out[r] = acc;
  }
}

void run_forward(const MlpModel& model, std::span<const double> x, Trace& trace) {
  const auto& layers = model.layers();
  trace.pre.resize(layers.size());
  Vec act(x.begin(), x.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    dense(layers[l], act, trace.pre[l]);
    if (l + 1 < layers.size()) {
      act = trace.pre[l];
      for (double& a : act) a = a > 0.0 ? a : 0.0;
    }
  }
}

Vec log_softmax(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - zmax);
  const double lse = zmax + std::log(sum);
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
  return out;
}

// Value of the target and its gradient with respect to the logits.
double head_value_and_grad(std::span<const double> z, const ScalarTarget& target, Vec& dz) {
  const std::size_t k = target.class_index;
  dz.assign(z.size(), 0.0);
  if (target.space == OutputSpace::logit) {
    dz[k] = 1.0;
    return z[k];
  }
  const Vec logp = log_softmax(z);
  if (target.space == OutputSpace::log_probability) {
    for (std::size_t j = 0; j < z.size(); ++j) dz[j] = -std::exp(logp[j]);
    dz[k] += 1.0;
    return logp[k];
  }
  const double pk = std::exp(logp[k]);
  for (std::size_t j = 0; j < z.size(); ++j) dz[j] = -pk * std::exp(logp[j]);
  dz[k] += pk;
  return pk;
}

// Backpropagates dz (gradient w.r.t. the logits) to the input.
Vec backward_to_input(const MlpModel& model, const Trace& trace, Vec delta) {
  const auto& layers = model.layers();
  Vec prev;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    prev.assign(layer.in, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      const double* row = layer.weight.data() + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) prev[c] += d * row[c];
    }
    if (l > 0) {
      const Vec& pre = trace.pre[l - 1];
      for (std::size_t c = 0; c < prev.size(); ++c) {
        if (!(pre[c] > 0.0)) prev[c] = 0.0;
      }
    }
    delta.swap(prev);
  }
  return delta;
}

}  // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("model needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.in == 0 || layer.out == 0) throw ShapeError("layer with zero width");
    if (layer.weight.size() != layer.in * layer.out || layer.bias.size() != layer.out) {
      throw ShapeError("layer " + std::to_string(l) + " parameter sizes do not match its shape");
    }
    if (l > 0 && layers_[l - 1].out != layer.in) {
      throw ShapeError("layer " + std::to_string(l) + " input does not match previous output");
    }
  }
  if (layers_.back().out < 2) throw ShapeError("classifier needs at least two classes");
}

MlpModel MlpModel::zeros(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) throw ShapeError("need at least input and output sizes");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer layer;
    layer.in = sizes[i];
    layer.out = sizes[i + 1];
    layer.weight.assign(layer.in * layer.out, 0.0);
    layer.bias.assign(layer.out, 0.0);
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

MlpModel MlpModel::random(std::span<const std::size_t> sizes, std::uint64_t seed) {
  MlpModel model = zeros(sizes);
  std::mt19937_64 rng(seed);
  for (DenseLayer& layer : model.layers_) {
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(layer.in)));
    for (double& w : layer.weight) w = init(rng);
  }
  return model;
}

std::size_t MlpModel::input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
std::size_t MlpModel::num_classes() const { return layers_.empty() ? 0 : layers_.back().out; }

std::vector<std::size_t> MlpModel::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers_.empty()) return sizes;
  sizes.push_back(layers_.front().in);
  for (const auto& layer : layers_) sizes.push_back(layer.out);
  return sizes;
}

Vec logits(const MlpModel& model, std::span<const double> x) {
  check_input(model, x);
  Trace trace;
  run_forward(model, x, trace);
  return trace.pre.back();
}

Vec forward(const MlpModel& model, std::span<const double> x) {
  return log_softmax(logits(model, x));
}

std::size_t predict(const MlpModel& model, std::span<const double> x) {
  const Vec z = logits(model, x);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

ScalarTarget predicted_target(const MlpModel& model, std::span<const double> x,
                              OutputSpace space) {
  return ScalarTarget{predict(model, x), space};
}

double scalar_output(const MlpModel& model, std::span<const double> x,
                     const ScalarTarget& target) {
  check_target(model, target);
  const Vec z = logits(model, x);
  switch (target.space) {
    case OutputSpace::logit:
      return z[target.class_index];
    case OutputSpace::log_probability:
      return log_softmax(z)[target.class_index];
    case OutputSpace::probability:
      return std::exp(log_softmax(z)[target.class_index]);
  }
  return 0.0;
}

ValueAndGradient value_and_gradient(const MlpModel& model, std::span<const double> x,
                                    const ScalarTarget& target) {
  check_input(model, x);
  check_target(model, target);
  Trace trace;
  run_forward(model, x, trace);
  Vec dz;
  const double value = head_value_and_grad(trace.pre.back(), target, dz);
  return {value, backward_to_input(model, trace, std::move(dz))};
}

Vec input_gradient(const MlpModel& model, std::span<const double> x,
                   const ScalarTarget& target) {
  return value_and_gradient(model, x, target).gradient;
}

GradientAndHessian gradient_and_hessian(const MlpModel& model, std::span<const double> x,
                                        const ScalarTarget& target) {
  check_input(model, x);
  check_target(model, target);
  Trace trace;
  run_forward(model, x, trace);
  const auto& layers = model.layers();
  const std::size_t d = model.input_dim();

  // Forward-mode Jacobian of each layer's pre-activation w.r.t. x, [units x d].
  std::vector<double> jac;
  {
    const DenseLayer& first = layers.front();
    jac = first.weight;
  }
  for (std::size_t l = 1; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    const Vec& prev_pre = trace.pre[l - 1];
    std::vector<double> next(layer.out * d, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      const double* row = layer.weight.data() + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) {
        if (!(prev_pre[c] > 0.0) || row[c] == 0.0) continue;
        for (std::size_t i = 0; i < d; ++i) next[r * d + i] += row[c] * jac[c * d + i];
      }
    }
    jac.swap(next);
  }

  const Vec& z = trace.pre.back();
  const std::size_t n_cls = z.size();
  const std::size_t k = target.class_index;
  Vec dz(n_cls, 0.0);
  std::vector<double> curv(n_cls * n_cls, 0.0);
  double value = 0.0;
  if (target.space == OutputSpace::logit) {
    dz[k] = 1.0;
    value = z[k];
  } else {
    const Vec logp = log_softmax(z);
    Vec p(n_cls);
    for (std::size_t j = 0; j < n_cls; ++j) p[j] = std::exp(logp[j]);
    if (target.space == OutputSpace::log_probability) {
      value = logp[k];
      for (std::size_t j = 0; j < n_cls; ++j) {
        dz[j] = (j == k ? 1.0 : 0.0) - p[j];
        for (std::size_t m = 0; m < n_cls; ++m) {
          curv[j * n_cls + m] = -(p[j] * (j == m ? 1.0 : 0.0) - p[j] * p[m]);
        }
      }
    } else {
      const double pk = p[k];
      value = pk;
      for (std::size_t j = 0; j < n_cls; ++j) {
        const double ej = (j == k ? 1.0 : 0.0) - p[j];
        dz[j] = pk * ej;
        for (std::size_t m = 0; m < n_cls; ++m) {
          const double em = (k == m ? 1.0 : 0.0) - p[m];
          curv[j * n_cls + m] = pk * em * ej - pk * (p[j] * (j == m ? 1.0 : 0.0) - p[j] * p[m]);
        }
      }
    }
  }

  GradientAndHessian out;
  out.value = value;
  out.gradient.assign(d, 0.0);
  for (std::size_t j = 0; j < n_cls; ++j) {
    for (std::size_t i = 0; i < d; ++i) out.gradient[i] += dz[j] * jac[j * d + i];
  }
  // H = J^T S J
  std::vector<double> sj(n_cls * d, 0.0);
  for (std::size_t j = 0; j < n_cls; ++j) {
    for (std::size_t m = 0; m < n_cls; ++m) {
      const double s = curv[j * n_cls + m];
      if (s == 0.0) continue;
      for (std::size_t i = 0; i < d; ++i) sj[j * d + i] += s * jac[m * d + i];
    }
  }
  out.hessian.assign(d * d, 0.0);
  for (std::size_t j = 0; j < n_cls; ++j) {
    for (std::size_t a = 0; a < d; ++a) {
      const double ja = jac[j * d + a];
      if (ja == 0.0) continue;
      for (std::size_t b = 0; b < d; ++b) out.hessian[a * d + b] += ja * sj[j * d + b];
    }
  }
  return out;
}

TrainResult train(MlpModel model, const Dataset& data, const TrainConfig& config) {
  if (data.points.size() != data.labels.size()) {
    throw ArgumentError("dataset has mismatched point and label counts");
  }
  if (config.epochs == 0) {
    TrainResult unchanged{model, 0.0, 0.0};
    if (!data.points.empty()) {
      unchanged.final_loss = mean_cross_entropy(model, data);
      unchanged.train_accuracy = accuracy(model, data);
    }
    return unchanged;
  }
  if (data.points.empty()) throw ArgumentError("cannot train on an empty dataset");
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  const std::size_t n_cls = model.num_classes();
  for (int label : data.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_cls) {
      throw ArgumentError("label " + std::to_string(label) + " outside [0, classes)");
    }
  }
  for (const Vec& p : data.points) check_input(model, p);

  auto& layers = model.mutable_layers();
  std::vector<DenseLayer> grad = layers;
  std::vector<DenseLayer> velocity = layers;
  for (auto* set : {&grad, &velocity}) {
    for (DenseLayer& layer : *set) {
      std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
      std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  Trace trace;
  std::vector<Vec> acts(layers.size());
  double epoch_loss = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (DenseLayer& layer : grad) {
        std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
        std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
      }
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t idx = order[b];
        const Vec& x = data.points[idx];
        run_forward(model, x, trace);
        // Post-activation inputs of each layer.
        acts[0] = x;
        for (std::size_t l = 1; l < layers.size(); ++l) {
          acts[l] = trace.pre[l - 1];
          for (double& a : acts[l]) a = a > 0.0 ? a : 0.0;
        }
        const Vec logp = log_softmax(trace.pre.back());
        const auto y = static_cast<std::size_t>(data.labels[idx]);
        epoch_loss -= logp[y];
        Vec delta(n_cls);
        for (std::size_t j = 0; j < n_cls; ++j) delta[j] = std::exp(logp[j]) * scale;
        delta[y] -= scale;
        for (std::size_t l = layers.size(); l-- > 0;) {
          const DenseLayer& layer = layers[l];
          DenseLayer& g = grad[l];
          const Vec& in = acts[l];
          for (std::size_t r = 0; r < layer.out; ++r) {
            const double d = delta[r];
            if (d == 0.0) continue;
            g.bias[r] += d;
            double* grow = g.weight.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) grow[c] += d * in[c];
          }
          if (l == 0) break;
          Vec prev(layer.in, 0.0);
          for (std::size_t r = 0; r < layer.out; ++r) {
            const double d = delta[r];
            if (d == 0.0) continue;
            const double* row = layer.weight.data() + r * layer.in;
            for (std::size_t c = 0; c < layer.in; ++c) prev[c] += d * row[c];
          }
          const Vec& pre = trace.pre[l - 1];
          for (std::size_t c = 0; c < prev.size(); ++c) {
            if (!(pre[c] > 0.0)) prev[c] = 0.0;
          }
          delta.swap(prev);
        }
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        DenseLayer& layer = layers[l];
        DenseLayer& v = velocity[l];
        const DenseLayer& g = grad[l];
        for (std::size_t i = 0; i < layer.weight.size(); ++i) {
          v.weight[i] = config.momentum * v.weight[i] - config.learning_rate * g.weight[i];
          layer.weight[i] += v.weight[i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          v.bias[i] = config.momentum * v.bias[i] - config.learning_rate * g.bias[i];
          layer.bias[i] += v.bias[i];
        }
      }
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("training loss became non-finite in epoch " + std::to_string(epoch));
    }
  }
  TrainResult result{std::move(model), 0.0, 0.0};
  result.final_loss = mean_cross_entropy(result.model, data);
  result.train_accuracy = accuracy(result.model, data);
  return result;
}

double accuracy(const MlpModel& model, const Dataset& data) {
  if (data.points.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict(model, data.points[i]) == static_cast<std::size_t>(data.labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double mean_cross_entropy(const MlpModel& model, const Dataset& data) {
  if (data.points.empty()) return 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss -= forward(model, data.points[i])[static_cast<std::size_t>(data.labels[i])];
  }
  return loss / static_cast<double>(data.size());
}

std::string model_to_json(const MlpModel& model) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["activation"] = "relu";
  doc["head"] = "log_softmax";
  doc["layer_sizes"] = model.layer_sizes();
  auto weights = nlohmann::ordered_json::array();
  auto biases = nlohmann::ordered_json::array();
  for (const DenseLayer& layer : model.layers()) {
    weights.push_back(layer.weight);
    biases.push_back(layer.bias);
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc.dump(1) + "\n";
}

MlpModel model_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw FormatError("unsupported model format_version");
    }
    if (doc.at("activation").get<std::string>() != "relu") {
      throw FormatError("unsupported activation tag");
    }
    const auto sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (sizes.size() < 2 || weights.size() != sizes.size() - 1 ||
        biases.size() != sizes.size() - 1) {
      throw FormatError("layer_sizes, weights and biases disagree");
    }
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      DenseLayer layer;
      layer.in = sizes[l];
      layer.out = sizes[l + 1];
      layer.weight = weights[l].get<std::vector<double>>();
      layer.bias = biases[l].get<std::vector<double>>();
      layers.push_back(std::move(layer));
    }
    return MlpModel(std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out << model_to_json(model);
  if (!out) throw Error("failed writing " + file.string());
}

MlpModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open model file " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace gig
