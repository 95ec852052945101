#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>

#include "gig/errors.hpp"
#include "gig/geodesic_knn.hpp"
#include "support/fixtures.hpp"

using namespace gig;
using gig::testing::exhaustive_shortest_path;
using gig::testing::random_geometric_graph;
using gig::testing::small_moons;

namespace {

std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

Points random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Points p(n);
  for (Vec& v : p) v = {u(rng), u(rng)};
  return p;
}

// Direct reading of the union rule: sort every other point by (distance, index).
std::set<std::pair<std::size_t, std::size_t>> brute_force_edges(const Points& p, std::size_t k) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return distance(p[i], p[a]) < distance(p[i], p[b]);
    });
    for (std::size_t r = 0; r < k; ++r) edges.insert(ordered(i, order[r]));
  }
  return edges;
}

std::size_t count_components(const GeodesicGraph& g) {
  std::vector<std::size_t> parent(g.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const GraphEdge& e : g.adjacency[i]) parent[find(i)] = find(e.to);
  }
  std::size_t c = 0;
  for (std::size_t i = 0; i < g.size(); ++i) c += find(i) == i;
  return c;
}

Points blobs(std::size_t clusters, std::size_t per, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.05);
  Points p;
  for (std::size_t c = 0; c < clusters; ++c) {
    const double cx = 3.0 * static_cast<double>(c), cy = (c % 2) ? 2.0 : 0.0;
    for (std::size_t i = 0; i < per; ++i) p.push_back({cx + n(rng), cy + n(rng)});
  }
  return p;
}

}  // namespace

TEST(KnnGraph, MatchesBruteForceUnionRule) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Points p = random_cloud(60, seed);
    for (std::size_t k : {1u, 3u, 7u}) {
      const GeodesicGraph g = build_knn_graph(p, k);
      std::set<std::pair<std::size_t, std::size_t>> got;
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (const GraphEdge& e : g.adjacency[i]) got.insert(ordered(i, e.to));
      }
      EXPECT_EQ(got, brute_force_edges(p, k)) << "seed " << seed << " k " << k;
      EXPECT_EQ(g.num_edges(), got.size());
    }
  }
}

TEST(KnnGraph, TiesGoToLowerIndex) {
  // Node 0 has neighbours 1 and 2 at the same distance; node 2 prefers 3.
  const Points p{{0.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}, {-1.5, 0.0}};
  const GeodesicGraph g = build_knn_graph(p, 1);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(KnnGraph, AdjacencySortedAndSymmetric) {
  const GeodesicGraph g = build_knn_graph(random_cloud(80, 3), 5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_TRUE(std::is_sorted(g.adjacency[i].begin(), g.adjacency[i].end(),
                               [](const GraphEdge& a, const GraphEdge& b) { return a.to < b.to; }));
    EXPECT_GE(g.adjacency[i].size(), 5u);
    for (const GraphEdge& e : g.adjacency[i]) EXPECT_TRUE(g.has_edge(e.to, i));
  }
}

TEST(KnnGraph, RejectsBadK) {
  const Points p = random_cloud(5, 0);
  EXPECT_THROW(build_knn_graph(p, 0), ArgumentError);
  EXPECT_THROW(build_knn_graph(p, 5), ArgumentError);
  EXPECT_NO_THROW(build_knn_graph(p, 4));
}

TEST(EdgeWeight, LinearLogitIsGradNormTimesLength) {
  DenseLayer l{2, 2, {0.0, 0.0, 3.0, 4.0}, {0.0, 0.0}};
  const MlpModel m({l});
  const ScalarTarget t{1, OutputSpace::logit};
  EXPECT_NEAR(edge_weight(m, t, Vec{0.0, 0.0}, Vec{0.6, 0.8}, 10), 5.0, 1e-12);
  EXPECT_EQ(edge_weight(m, t, Vec{1.0, 1.0}, Vec{1.0, 1.0}, 10), 0.0);
  EXPECT_THROW(edge_weight(m, t, Vec{0.0, 0.0}, Vec{1.0, 1.0}, 0), ArgumentError);
}

TEST(EdgeWeight, BoundaryCrossingEdgeIsHeavier) {
  const auto& s = small_moons();
  const ScalarTarget t{1, OutputSpace::probability};
  // Walk from inside the upper moon towards the lower one until the
  // prediction flips; the crossing edge straddles that point.
  Vec cross{0.5, 0.6};
  while (predict(s.model, cross) == 1) cross[1] -= 0.01;
  const Vec a{cross[0], cross[1] + 0.1}, b{cross[0], cross[1] - 0.1};
  const Vec fa{-1.2, 1.6}, fb{-1.2, 1.8};
  EXPECT_GT(edge_weight(s.model, t, a, b, 10), edge_weight(s.model, t, fa, fb, 10));
}

TEST(Bridges, ConnectSampledDisconnectedGraphs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t clusters = 2 + seed % 4;
    GeodesicGraph g = build_knn_graph(blobs(clusters, 12, seed), 3);
    const std::size_t before = count_components(g);
    EXPECT_EQ(g.num_components(), before);
    EXPECT_GE(before, clusters);
    const GeodesicGraph c = connect_components(g, euclidean_edge_weight());
    EXPECT_EQ(count_components(c), 1u);
    EXPECT_EQ(c.num_components(), 1u);
    EXPECT_EQ(c.bridges.size(), before - 1);
    for (const Bridge& b : c.bridges) {
      EXPECT_TRUE(c.has_edge(b.a, b.b));
      EXPECT_DOUBLE_EQ(b.weight, distance(c.nodes[b.a], c.nodes[b.b]));
    }
  }
}

TEST(Bridges, FirstBridgeIsGlobalClosestCrossPair) {
  const Points p{{0.0, 0.0}, {0.1, 0.0}, {5.0, 0.0}, {5.1, 0.0}, {2.0, 3.0}, {2.1, 3.0}};
  GeodesicGraph g = build_knn_graph(p, 1);
  ASSERT_EQ(g.num_components(), 3u);
  const GeodesicGraph c = connect_components(g, euclidean_edge_weight());
  ASSERT_EQ(c.bridges.size(), 2u);
  // Closest cross pair overall: (0.1,0) - (2,3) vs (5,0) - (2.1,3): pick by length.
  double best = 1e300;
  std::pair<std::size_t, std::size_t> arg;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (g.component_id[i] == g.component_id[j]) continue;
      if (distance(p[i], p[j]) < best) {
        best = distance(p[i], p[j]);
        arg = {i, j};
      }
    }
  }
  EXPECT_EQ(ordered(c.bridges[0].a, c.bridges[0].b), arg);
}

TEST(Bridges, ConnectedGraphUnchanged) {
  GeodesicGraph g = build_knn_graph(random_cloud(40, 1), 10);
  ASSERT_EQ(g.num_components(), 1u);
  const GeodesicGraph c = connect_components(g, euclidean_edge_weight());
  EXPECT_TRUE(c.bridges.empty());
  EXPECT_EQ(c.num_edges(), g.num_edges());
}

TEST(ShortestPath, MatchesExhaustiveEnumeration) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const std::size_t n = 2 + seed % 9;
    const GeodesicGraph g = random_geometric_graph(n, 0.45, seed);
    for (std::size_t t = 1; t < n; ++t) {
      const double ref = exhaustive_shortest_path(g, 0, t);
      if (!std::isfinite(ref)) {
        EXPECT_THROW(shortest_path(g, 0, t), ConnectivityError);
        EXPECT_THROW(shortest_path(g, 0, t, ShortestPathAlgorithm::astar), ConnectivityError);
        continue;
      }
      const ShortestPathResult d = shortest_path(g, 0, t);
      const ShortestPathResult a = shortest_path(g, 0, t, ShortestPathAlgorithm::astar);
      EXPECT_EQ(d.total_weight, ref);
      EXPECT_EQ(a.total_weight, ref);
      // The reported nodes form a walk whose weight is the total.
      for (const ShortestPathResult* r : {&d, &a}) {
        ASSERT_EQ(r->nodes.front(), 0u);
        ASSERT_EQ(r->nodes.back(), t);
        double w = 0.0;
        for (std::size_t i = 1; i < r->nodes.size(); ++i) w += g.weight(r->nodes[i - 1], r->nodes[i]);
        EXPECT_EQ(w, r->total_weight);
      }
    }
  }
}

TEST(ShortestPath, SourceEqualsSink) {
  const GeodesicGraph g = random_geometric_graph(5, 0.5, 1);
  const ShortestPathResult r = shortest_path(g, 2, 2);
  EXPECT_EQ(r.nodes, std::vector<std::size_t>{2});
  EXPECT_EQ(r.total_weight, 0.0);
}

TEST(ShortestPath, TreeAgreesWithPointQueries) {
  const GeodesicGraph g = random_geometric_graph(10, 0.4, 77);
  const ShortestPathTree tree = shortest_path_tree(g, 0);
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (!tree.reachable(v)) {
      EXPECT_THROW(tree.path_to(v), ConnectivityError);
      continue;
    }
    EXPECT_EQ(tree.path_to(v).total_weight, shortest_path(g, 0, v).total_weight);
  }
}

TEST(GeodesicIgKnn, PathRunsFromBaselineToInputThroughSamples) {
  const auto& s = small_moons();
  const Points samples(s.test.points.begin(), s.test.points.begin() + 300);
  const Vec x{0.1, 0.95};
  const ScalarTarget t = predicted_target(s.model, x);
  const PathAttributionResult r = geodesic_ig_knn(s.model, t, x, gig::testing::kMoonsBaseline,
                                                  samples);
  EXPECT_EQ(r.path.anchors.front(), gig::testing::kMoonsBaseline);
  EXPECT_EQ(r.path.anchors.back(), x);
  for (std::size_t i = 1; i + 1 < r.path.anchors.size(); ++i) {
    EXPECT_NE(std::find(samples.begin(), samples.end(), r.path.anchors[i]), samples.end());
  }
  const Attribution direct = path_attribution(s.model, t, r.path);
  EXPECT_EQ(direct.values, r.attribution.values);
  EXPECT_LT(r.attribution.completeness_residual, 1e-2);
}

TEST(GeodesicIgKnn, InputEqualToBaselineGivesZero) {
  const auto& s = small_moons();
  const Points samples(s.test.points.begin(), s.test.points.begin() + 50);
  const Vec& b = gig::testing::kMoonsBaseline;
  const PathAttributionResult r =
      geodesic_ig_knn(s.model, {0, OutputSpace::probability}, b, b, samples);
  EXPECT_EQ(r.attribution.values, (Vec{0.0, 0.0}));
}

TEST(ExplainBatch, EqualsPerPathAttributionAndSingleQueries) {
  const auto& s = small_moons();
  const Points samples(s.test.points.begin(), s.test.points.begin() + 200);
  Points inputs(s.test.points.begin() + 150, s.test.points.begin() + 180);
  inputs.push_back({0.05, 0.2});  // not a sample
  inputs.push_back(inputs.front());  // duplicate
  std::vector<ScalarTarget> targets;
  for (const Vec& x : inputs) targets.push_back(predicted_target(s.model, x));
  for (ShortestPathAlgorithm alg : {ShortestPathAlgorithm::dijkstra, ShortestPathAlgorithm::astar}) {
    KnnPathConfig cfg;
    cfg.algorithm = alg;
    const auto batch = explain_knn_batch(s.model, targets, inputs, gig::testing::kMoonsBaseline,
                                         samples, cfg);
    ASSERT_EQ(batch.size(), inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      EXPECT_EQ(batch[i].path.anchors.back(), inputs[i]);
      const Attribution direct = path_attribution(s.model, targets[i], batch[i].path);
      EXPECT_EQ(direct.values, batch[i].attribution.values);
      EXPECT_EQ(direct.f_input, batch[i].attribution.f_input);
    }
    EXPECT_EQ(batch.front().attribution.values, batch.back().attribution.values);
  }
}

TEST(ExplainBatch, EuclideanRuleIgnoresModel) {
  const auto& s = small_moons();
  const Points samples(s.test.points.begin(), s.test.points.begin() + 100);
  const Points inputs{s.test.points[3], s.test.points[7]};
  std::vector<ScalarTarget> targets{{0, OutputSpace::probability}, {1, OutputSpace::probability}};
  const auto r = explain_knn_batch(s.model, targets, inputs, gig::testing::kMoonsBaseline, samples,
                                   KnnPathConfig{}, EdgeRule::euclidean);
  // Same graph for both classes: shortest path is plain Euclidean.
  double len = 0.0;
  for (std::size_t i = 1; i < r[0].path.anchors.size(); ++i) {
    len += distance(r[0].path.anchors[i - 1], r[0].path.anchors[i]);
  }
  EXPECT_GE(len, distance(inputs[0], gig::testing::kMoonsBaseline) - 1e-12);
}

TEST(ExplainBatch, ShapeMismatchRejected) {
  const auto& s = small_moons();
  const Points samples(s.test.points.begin(), s.test.points.begin() + 20);
  const Points inputs{{0.0, 0.0}};
  const std::vector<ScalarTarget> targets;
  EXPECT_THROW(explain_knn_batch(s.model, targets, inputs, gig::testing::kMoonsBaseline, samples),
               ArgumentError);
}
