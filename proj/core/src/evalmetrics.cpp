#include "gig/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gig/errors.hpp"

namespace gig {

namespace {

double clamp_prob(double p) { return std::clamp(p, 1e-12, 1.0 - 1e-12); }

double logit_of(double p) {
  p = clamp_prob(p);
  return std::log(p / (1.0 - p));
}

ScalarTarget probability_space(ScalarTarget t) {
  t.space = OutputSpace::probability;
  return t;
}

}  // namespace

double purity_from_scores(std::span<const double> scores, std::span<const int> predicted) {
  if (scores.size() != predicted.size()) throw ArgumentError("scores and labels differ in length");
  if (scores.empty()) throw ArgumentError("purity of an empty set");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const std::size_t top = (scores.size() + 1) / 2;
  double sum = 0.0;
  for (std::size_t r = 0; r < top; ++r) sum += predicted[order[r]];
  return sum / static_cast<double>(top);
}

double purity(const MlpModel& model, std::span<const Vec> attributions, const Points& points) {
  if (attributions.size() != points.size()) {
    throw ArgumentError("need one attribution per point");
  }
  if (points.size() < 2) throw ArgumentError("purity needs at least two points");
  std::vector<double> scores(points.size());
  std::vector<int> predicted(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double s = 0.0;
    for (double a : attributions[i]) s += std::abs(a);
    scores[i] = s;
    predicted[i] = static_cast<int>(predict(model, points[i]));
  }
  return purity_from_scores(scores, predicted);
}

double curve_auc(std::span<const double> grid, std::span<const double> values) {
  if (grid.size() != values.size()) throw ArgumentError("grid and values differ in length");
  if (grid.size() < 2) throw ArgumentError("area needs at least two grid points");
  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ArgumentError("grid must be strictly increasing");
    area += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return area / (grid.back() - grid.front());
}

double purity_auc(std::span<const double> grid, std::span<const double> values) {
  return curve_auc(grid, values);
}

double curve_aoc(std::span<const double> grid, std::span<const double> values) {
  return -curve_auc(grid, values);
}

std::size_t masked_feature_count(double k_percent, std::size_t d) {
  if (!(k_percent >= 0.0 && k_percent <= 100.0)) throw ArgumentError("k% must lie in [0, 100]");
  // Round away representation noise before ceil so 50% of 2 is exactly 1.
  const double raw = k_percent / 100.0 * static_cast<double>(d);
  const double snapped = std::round(raw * 1e9) / 1e9;
  return std::min(d, static_cast<std::size_t>(std::ceil(snapped)));
}

std::vector<std::size_t> rank_features(std::span<const double> attribution) {
  std::vector<std::size_t> order(attribution.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(attribution[a]) > std::abs(attribution[b]);
  });
  return order;
}

Vec mask_top_features(std::span<const double> x, std::span<const double> attribution,
                      double k_percent, std::span<const double> mask_fill) {
  if (x.size() != attribution.size() || x.size() != mask_fill.size()) {
    throw ShapeError("input, attribution and mask fill differ in dimension");
  }
  const std::size_t count = masked_feature_count(k_percent, x.size());
  const std::vector<std::size_t> order = rank_features(attribution);
  Vec masked(x.begin(), x.end());
  for (std::size_t r = 0; r < count; ++r) masked[order[r]] = mask_fill[order[r]];
  return masked;
}

double comprehensiveness(const MlpModel& model, const ScalarTarget& target,
                         std::span<const double> x, std::span<const double> attribution,
                         double k_percent, std::span<const double> mask_fill) {
  const ScalarTarget t = probability_space(target);
  const Vec masked = mask_top_features(x, attribution, k_percent, mask_fill);
  return scalar_output(model, x, t) - scalar_output(model, masked, t);
}

double log_odds(const MlpModel& model, const ScalarTarget& target, std::span<const double> x,
                std::span<const double> attribution, double k_percent,
                std::span<const double> mask_fill) {
  const ScalarTarget t = probability_space(target);
  const Vec masked = mask_top_features(x, attribution, k_percent, mask_fill);
  return logit_of(scalar_output(model, masked, t)) - logit_of(scalar_output(model, x, t));
}

std::vector<double> default_k_grid() {
  std::vector<double> grid{1.0};
  for (int k = 5; k <= 65; k += 5) grid.push_back(k);
  return grid;
}

double symmetry_check(const MlpModel& model, const AttributionFn& method, const Points& probes,
                      std::span<const double> baseline, std::size_t i, std::size_t j) {
  const std::size_t d = model.input_dim();
  if (i >= d || j >= d || i == j) throw ArgumentError("invalid symmetry feature pair");
  if (baseline.size() != d) throw ShapeError("baseline has the wrong dimension");
  if (baseline[i] != baseline[j]) throw FixtureError("baseline is not symmetric in (i, j)");
  auto swapped = [&](std::span<const double> x) {
    Vec s(x.begin(), x.end());
    std::swap(s[i], s[j]);
    return s;
  };
  // Off-diagonal probes of the fixture itself.
  Points fixture_probes = probes;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int r = 0; r < 32; ++r) {
    Vec p(d);
    for (double& v : p) v = u(rng);
    fixture_probes.push_back(std::move(p));
  }
  for (const Vec& p : fixture_probes) {
    const Vec a = logits(model, p);
    const Vec b = logits(model, swapped(p));
    for (std::size_t c = 0; c < a.size(); ++c) {
      if (std::abs(a[c] - b[c]) > 1e-12 * (1.0 + std::abs(a[c]))) {
        throw FixtureError("model is not symmetric in the requested features");
      }
    }
  }
  double worst = 0.0;
  for (const Vec& x : probes) {
    if (x.size() != d || x[i] != x[j]) throw FixtureError("probe is not on the diagonal");
    const Vec attr = method(x, baseline);
    worst = std::max(worst, std::abs(attr[i] - attr[j]));
  }
  return worst;
}

MlpModel symmetric_fixture(std::size_t hidden_pairs, std::uint64_t seed) {
  if (hidden_pairs == 0) throw ArgumentError("fixture needs at least one hidden pair");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t hidden = 2 * hidden_pairs + 2;
  DenseLayer first{2, hidden, std::vector<double>(2 * hidden), std::vector<double>(hidden)};
  DenseLayer head{hidden, 2, std::vector<double>(2 * hidden), std::vector<double>(2)};
  for (std::size_t p = 0; p < hidden_pairs; ++p) {
    const double a = normal(rng), b = normal(rng), bias = 0.5 * normal(rng);
    const std::size_t u = 2 * p, v = 2 * p + 1;
    first.w(u, 0) = a;
    first.w(u, 1) = b;
    first.w(v, 0) = b;
    first.w(v, 1) = a;
    first.bias[u] = first.bias[v] = bias;
    const double out0 = normal(rng), out1 = normal(rng);
    head.w(0, u) = head.w(0, v) = out0;
    head.w(1, u) = head.w(1, v) = out1;
  }
  // |x0 - x1| ridge.
  const std::size_t r0 = 2 * hidden_pairs, r1 = r0 + 1;
  first.w(r0, 0) = 1.0;
  first.w(r0, 1) = -1.0;
  first.w(r1, 0) = -1.0;
  first.w(r1, 1) = 1.0;
  head.w(0, r0) = head.w(0, r1) = -2.0;
  head.w(1, r0) = head.w(1, r1) = 2.0;
  return MlpModel({std::move(first), std::move(head)});
}

}  // namespace gig
