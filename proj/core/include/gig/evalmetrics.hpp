#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gig/diffnet.hpp"
#include "gig/path.hpp"
#include "gig/types.hpp"

namespace gig {

/// Purity: rank points by sum_i |A_i| (descending, ties to the
/// lower index) and average the predicted label over the top ceil(N/2).
double purity(const MlpModel& model, std::span<const Vec> attributions, const Points& points);

/// Same ranking on precomputed scores and predicted labels.
double purity_from_scores(std::span<const double> scores, std::span<const int> predicted);

/// Trapezoidal area under (grid, values) divided by the grid span. The grid
/// must be strictly increasing with at least two points.
double purity_auc(std::span<const double> grid, std::span<const double> values);
double curve_auc(std::span<const double> grid, std::span<const double> values);
/// Area over the curve: -curve_auc.
double curve_aoc(std::span<const double> grid, std::span<const double> values);

/// Number of features masked at k percent: ceil(k/100 * d).
std::size_t masked_feature_count(double k_percent, std::size_t d);
/// Feature indices ordered by |A| descending, ties to the lower index.
std::vector<std::size_t> rank_features(std::span<const double> attribution);
/// `x` with the top-k% features replaced by `mask_fill`.
Vec mask_top_features(std::span<const double> x, std::span<const double> attribution,
                      double k_percent, std::span<const double> mask_fill);

/// p(x) - p(masked x) for the target class in probability space.
double comprehensiveness(const MlpModel& model, const ScalarTarget& target,
                         std::span<const double> x, std::span<const double> attribution,
                         double k_percent, std::span<const double> mask_fill);

/// logit(p_masked) - logit(p_orig), probabilities clamped to [1e-12, 1 - 1e-12].
double log_odds(const MlpModel& model, const ScalarTarget& target, std::span<const double> x,
                std::span<const double> attribution, double k_percent,
                std::span<const double> mask_fill);

/// Comprehensiveness and log-odds over a k% grid, averaged by the caller.
struct MaskCurve {
  std::vector<double> k_grid;
  std::vector<double> comprehensiveness;
  std::vector<double> log_odds;

  double comprehensiveness_auc() const { return curve_auc(k_grid, comprehensiveness); }
  double log_odds_aoc() const { return curve_aoc(k_grid, log_odds); }
};
/// Default grid 1, 5, 10, ..., 65.
std::vector<double> default_k_grid();

/// Attributes (x, baseline) -> values. Used by the symmetry check.
using AttributionFn = std::function<Vec(std::span<const double>, std::span<const double>)>;

/// Max |A_i - A_j| over `probes` (each with x_i == x_j). Throws FixtureError
/// if the model is not symmetric in (i, j) on the probes and their swaps, or
/// if a probe / the baseline is not on the diagonal.
double symmetry_check(const MlpModel& model, const AttributionFn& method, const Points& probes,
                      std::span<const double> baseline, std::size_t i = 0, std::size_t j = 1);

/// 2-input classifier whose hidden units come in swapped pairs sharing
/// output weights, so f(a, b) == f(b, a) up to rounding. Includes a
/// |x0 - x1| ridge so off-diagonal detours carry extra gradient.
MlpModel symmetric_fixture(std::size_t hidden_pairs, std::uint64_t seed);

}  // namespace gig
