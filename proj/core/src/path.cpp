#include "gig/path.hpp"

#include <cmath>
#include <string>

#include "gig/csv.hpp"

#include "gig/errors.hpp"

namespace gig {

void Path::validate() const {
  if (anchors.size() < 2) throw ArgumentError("a path needs at least two anchors");
  if (steps_per_segment == 0) throw ArgumentError("steps per segment must be >= 1");
  for (const Vec& a : anchors) {
    if (a.size() != anchors.front().size()) throw ShapeError("path anchors differ in dimension");
  }
}

double Path::euclidean_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < anchors.size(); ++i) len += distance(anchors[i - 1], anchors[i]);
  return len;
}

double completeness_residual(std::span<const double> values, double f_input, double f_baseline) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return std::abs(sum - (f_input - f_baseline));
}

double strong_completeness_residual(std::span<const double> values, double f_input,
                                    double f_baseline) {
  double sum = 0.0;
  for (double v : values) sum += std::abs(v);
  return std::abs(sum - std::abs(f_input - f_baseline));
}

Attribution make_attribution(Vec values, double f_input, double f_baseline,
                             double path_length_estimate) {
  Attribution a;
  a.completeness_residual = completeness_residual(values, f_input, f_baseline);
  a.strong_completeness_residual = strong_completeness_residual(values, f_input, f_baseline);
  a.values = std::move(values);
  a.f_input = f_input;
  a.f_baseline = f_baseline;
  a.path_length_estimate = path_length_estimate;
  return a;
}

Points interpolate(std::span<const double> a, std::span<const double> b, std::size_t m) {
  if (m == 0) throw ArgumentError("interpolation needs m >= 1");
  if (a.size() != b.size()) throw ShapeError("interpolation endpoints differ in dimension");
  Points out(m + 1, Vec(a.size()));
  for (std::size_t k = 0; k <= m; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(m);
    for (std::size_t i = 0; i < a.size(); ++i) out[k][i] = a[i] + t * (b[i] - a[i]);
  }
  out[m].assign(b.begin(), b.end());
  return out;
}

SegmentIntegral integrate_segment(const MlpModel& model, const ScalarTarget& target,
                                  std::span<const double> a, std::span<const double> b,
                                  std::size_t m) {
  if (m == 0) throw ArgumentError("segment integration needs m >= 1");
  if (a.size() != b.size()) throw ShapeError("segment endpoints differ in dimension");
  const std::size_t d = a.size();
  Vec mean_grad(d, 0.0);
  Vec point(d);
  double norm_sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    for (std::size_t i = 0; i < d; ++i) point[i] = a[i] + t * (b[i] - a[i]);
    const Vec g = input_gradient(model, point, target);
    for (std::size_t i = 0; i < d; ++i) mean_grad[i] += g[i];
    norm_sum += norm2(g);
  }
  SegmentIntegral out;
  out.attribution.resize(d);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < d; ++i) out.attribution[i] = (b[i] - a[i]) * (mean_grad[i] * inv_m);
  out.weighted_length = distance(a, b) * (norm_sum * inv_m);
  return out;
}

Vec segment_attribution(const MlpModel& model, const ScalarTarget& target,
                        std::span<const double> a, std::span<const double> b, std::size_t m) {
  return integrate_segment(model, target, a, b, m).attribution;
}

Attribution path_attribution(const MlpModel& model, const ScalarTarget& target, const Path& path) {
  path.validate();
  const std::size_t d = path.dim();
  Vec values(d, 0.0);
  double length = 0.0;
  for (std::size_t s = 1; s < path.anchors.size(); ++s) {
    const SegmentIntegral seg =
        integrate_segment(model, target, path.anchors[s - 1], path.anchors[s], path.steps_per_segment);
    for (std::size_t i = 0; i < d; ++i) values[i] += seg.attribution[i];
    length += seg.weighted_length;
  }
  return make_attribution(std::move(values), scalar_output(model, path.anchors.back(), target),
                          scalar_output(model, path.anchors.front(), target), length);
}

Attribution integrated_gradients(const MlpModel& model, const ScalarTarget& target,
                                 std::span<const double> input, std::span<const double> baseline,
                                 std::size_t steps) {
  if (steps == 0) throw ArgumentError("integrated gradients needs steps >= 1");
  if (input.size() != baseline.size()) throw ShapeError("input and baseline differ in dimension");
  const std::size_t d = input.size();
  Vec grad_sum(d, 0.0);
  Vec point(d);
  double norm_sum = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double alpha = (static_cast<double>(k) + 0.5) / static_cast<double>(steps);
    for (std::size_t i = 0; i < d; ++i) point[i] = baseline[i] + alpha * (input[i] - baseline[i]);
    const Vec g = input_gradient(model, point, target);
    for (std::size_t i = 0; i < d; ++i) grad_sum[i] += g[i];
    norm_sum += norm2(g);
  }
  const double inv = 1.0 / static_cast<double>(steps);
  Vec values(d);
  for (std::size_t i = 0; i < d; ++i) values[i] = (input[i] - baseline[i]) * (grad_sum[i] * inv);
  // Sum starts from zero exactly as path_attribution's accumulator does.
  Vec accumulated(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) accumulated[i] += values[i];
  return make_attribution(std::move(accumulated), scalar_output(model, input, target),
                          scalar_output(model, baseline, target),
                          distance(input, baseline) * (norm_sum * inv));
}

void write_path_csv(const Path& path, const std::filesystem::path& file) {
  std::string header;
  for (std::size_t i = 0; i < path.dim(); ++i) header += (i ? ",x" : "x") + std::to_string(i);
  CsvWriter csv(file, header);
  for (const Vec& a : path.anchors) {
    for (double v : a) csv.field(v);
    csv.end_row();
  }
}

}  // namespace gig
