#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "gig/types.hpp"

namespace gig {

/// Labelled 2-D point cloud. Label 1 is the upper moon, label 0 the lower.
struct Dataset {
  Points points;
  std::vector<int> labels;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
};

/// Two interleaving half circles:
///   upper (label 1): (cos t, sin t),           t in [0, pi]
///   lower (label 0): (1 - cos t, 0.5 - sin t), t in [0, pi]
/// with t evenly spaced per class and i.i.d. N(0, noise_sigma^2) added to
/// both coordinates. The upper moon receives ceil(n/2) points.
Dataset make_moons(std::size_t n, double noise_sigma, std::uint64_t seed);

/// Shuffled partition into floor(n * train_fraction) training points and the
/// remainder. Both sides must be non-empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

/// CSV with header `x0,x1,label` and 17 significant digits.
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& file);
Dataset read_dataset_csv(const std::filesystem::path& file);

}  // namespace gig
