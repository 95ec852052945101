#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gig/data.hpp"
#include "gig/diffnet.hpp"
#include "gig/geodesic_knn.hpp"
#include "gig/types.hpp"

namespace gig::testing {

/// A trained moons classifier together with the data it came from.
struct MoonsSetup {
  Dataset train;
  Dataset test;
  MlpModel model;
  double test_accuracy = 0.0;
};

/// 2,000 points at noise 0.15, 100 epochs. Trained once per process.
const MoonsSetup& small_moons();

/// 10,000 points, 8,000/2,000 split, 2-64-64-2, default training config.
/// Trained once per (noise, seed) per process.
const MoonsSetup& full_moons(double noise, std::uint64_t seed);

inline const Vec kMoonsBaseline{-0.5, -0.5};

/// Central difference of scalar_output in every coordinate.
Vec central_difference(const MlpModel& model, std::span<const double> x,
                       const ScalarTarget& target, double h);

/// max_i |a_i - b_i| / max(|b_i|, floor)
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-8);

/// Minimum path weight between source and sink by enumerating every simple
/// path; +inf when unreachable.
double exhaustive_shortest_path(const GeodesicGraph& graph, std::size_t source, std::size_t sink);

/// Random graph on n nodes in the unit square with edge probability p.
/// Weights are Euclidean length times U(1, 3).
GeodesicGraph random_geometric_graph(std::size_t n, double p, std::uint64_t seed);

double median(std::vector<double> v);

}  // namespace gig::testing
