#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gig/diffnet.hpp"
#include "gig/types.hpp"

namespace gig {

inline constexpr std::size_t kDefaultStepsPerSegment = 64;
inline constexpr std::size_t kDefaultStraightSteps = 512;

/// Piecewise-linear path from the baseline (first anchor) to the input (last
/// anchor). Every segment is integrated with `steps_per_segment` midpoints.
struct Path {
  Points anchors;
  std::size_t steps_per_segment = kDefaultStepsPerSegment;

  /// Throws ArgumentError / ShapeError if fewer than two anchors, mixed
  /// dimensions or zero steps.
  void validate() const;
  std::size_t dim() const { return anchors.empty() ? 0 : anchors.front().size(); }
  /// Euclidean length of the polyline.
  double euclidean_length() const;
};

/// Per-feature attribution for one input, together with the axiom residuals.
struct Attribution {
  Vec values;
  double f_input = 0.0;
  double f_baseline = 0.0;
  double completeness_residual = 0.0;
  double strong_completeness_residual = 0.0;
  double path_length_estimate = 0.0;
};

/// |sum_i A_i - (f(x) - f(baseline))|
double completeness_residual(std::span<const double> values, double f_input, double f_baseline);
/// |sum_i |A_i| - |f(x) - f(baseline)||
double strong_completeness_residual(std::span<const double> values, double f_input,
                                    double f_baseline);

/// Fills f_input, f_baseline and both residuals from `values`.
Attribution make_attribution(Vec values, double f_input, double f_baseline,
                             double path_length_estimate = 0.0);

/// a + (k/m)(b - a) for k = 0..m.
Points interpolate(std::span<const double> a, std::span<const double> b, std::size_t m);

/// (b - a) * mean of grad f over the m midpoints a + ((k + 0.5)/m)(b - a).
Vec segment_attribution(const MlpModel& model, const ScalarTarget& target,
                        std::span<const double> a, std::span<const double> b, std::size_t m);

/// Attribution and gradient-weighted length of one segment, sharing the
/// gradient evaluations.
struct SegmentIntegral {
  Vec attribution;
  double weighted_length = 0.0;
};
SegmentIntegral integrate_segment(const MlpModel& model, const ScalarTarget& target,
                                  std::span<const double> a, std::span<const double> b,
                                  std::size_t m);

/// Sum of segment attributions in anchor order.
Attribution path_attribution(const MlpModel& model, const ScalarTarget& target, const Path& path);

/// Anchor coordinates in order, header x0,x1,...
void write_path_csv(const Path& path, const std::filesystem::path& file);

/// Straight-line integrated gradients, computed without the Path machinery.
Attribution integrated_gradients(const MlpModel& model, const ScalarTarget& target,
                                 std::span<const double> input, std::span<const double> baseline,
                                 std::size_t steps = kDefaultStraightSteps);

}  // namespace gig
