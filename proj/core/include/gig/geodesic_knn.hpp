#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "gig/diffnet.hpp"
#include "gig/path.hpp"
#include "gig/types.hpp"

namespace gig {

struct GraphEdge {
  std::size_t to = 0;
  double weight = 0.0;
};

struct Bridge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

/// Undirected kNN graph. Adjacency lists are sorted by neighbour index and
/// every edge is stored in both directions with the same weight.
struct GeodesicGraph {
  Points nodes;
  std::vector<std::vector<GraphEdge>> adjacency;
  std::size_t k = 0;
  std::size_t m_edge = 0;
  std::vector<std::size_t> component_id;
  std::vector<Bridge> bridges;

  std::size_t size() const { return nodes.size(); }
  std::size_t num_edges() const;
  std::size_t num_components() const;
  bool has_edge(std::size_t i, std::size_t j) const;
  /// Throws ArgumentError when (i, j) is not an edge.
  double weight(std::size_t i, std::size_t j) const;
};

/// Weight assigned to the segment a -> b.
using EdgeWeightFn = std::function<double(std::span<const double>, std::span<const double>)>;

/// Edge (i, j) iff j is among the k nearest neighbours of i or vice versa.
/// Distance ties go to the lower index. Weights start at zero and components
/// are labelled.
GeodesicGraph build_knn_graph(const Points& points, std::size_t k);

/// ||a - b|| times the midpoint-rule mean of ||grad f|| over m samples.
double edge_weight(const MlpModel& model, const ScalarTarget& target, std::span<const double> a,
                   std::span<const double> b, std::size_t m_edge);

EdgeWeightFn gradient_edge_weight(const MlpModel& model, const ScalarTarget& target,
                                  std::size_t m_edge);
EdgeWeightFn euclidean_edge_weight();

/// Recomputes every edge weight with `weight_fn`.
void assign_weights(GeodesicGraph& graph, const EdgeWeightFn& weight_fn);

/// Relabels connected components; ids follow the lowest node index.
void label_components(GeodesicGraph& graph);

/// Repeatedly joins the two closest components by their minimum-Euclidean
/// cross pair until the graph is connected. Each added edge is weighted with
/// `weight_fn` and recorded in `bridges`.
GeodesicGraph connect_components(GeodesicGraph graph, const EdgeWeightFn& weight_fn);

/// build_knn_graph + assign_weights + connect_components.
GeodesicGraph build_geodesic_graph(const Points& nodes, std::size_t k, std::size_t m_edge,
                                   const EdgeWeightFn& weight_fn);

/// Debug dump: one row per undirected edge, `i,j,weight,is_bridge`.
void write_graph_csv(const GeodesicGraph& graph, const std::filesystem::path& file);

enum class ShortestPathAlgorithm { dijkstra, astar };

struct ShortestPathResult {
  std::vector<std::size_t> nodes;
  double total_weight = 0.0;
};

/// Minimum-weight path. A* uses h(v) = alpha * ||v - sink|| with alpha the
/// smallest weight / Euclidean-length ratio over all edges, which keeps the
/// heuristic admissible. Throws ConnectivityError when no path exists.
ShortestPathResult shortest_path(const GeodesicGraph& graph, std::size_t source, std::size_t sink,
                                 ShortestPathAlgorithm algorithm = ShortestPathAlgorithm::dijkstra);

/// Single-source Dijkstra over the whole graph.
struct ShortestPathTree {
  std::size_t source = 0;
  std::vector<double> distance;
  std::vector<std::size_t> parent;

  bool reachable(std::size_t node) const;
  ShortestPathResult path_to(std::size_t node) const;
};
ShortestPathTree shortest_path_tree(const GeodesicGraph& graph, std::size_t source);

struct KnnPathConfig {
  std::size_t k = 15;
  std::size_t m_edge = 10;
  std::size_t m_attr = kDefaultStepsPerSegment;
  ShortestPathAlgorithm algorithm = ShortestPathAlgorithm::dijkstra;
};

/// How graph edges are weighted: by gradient norm (Geodesic IG) or plain
/// Euclidean length (the model-agnostic Enhanced IG path).
enum class EdgeRule { gradient, euclidean };

struct PathAttributionResult {
  Attribution attribution;
  Path path;
  std::vector<Bridge> bridges;
};

/// Geodesic IG for one input: graph over samples + {baseline, input}, edge
/// weights, bridges, shortest path baseline -> input, then path integration.
PathAttributionResult geodesic_ig_knn(const MlpModel& model, const ScalarTarget& target,
                                      std::span<const double> input,
                                      std::span<const double> baseline, const Points& samples,
                                      const KnnPathConfig& config = {},
                                      EdgeRule rule = EdgeRule::gradient);

/// Routes many inputs through one graph built over samples + {baseline} +
/// any input not already present among the samples. Inputs equal to a sample
/// reuse that node. With Dijkstra a single shortest-path tree from the
/// baseline serves every input and segment integrals are shared along it;
/// the result equals calling path_attribution on each returned path.
std::vector<PathAttributionResult> explain_knn_batch(const MlpModel& model,
                                                     std::span<const ScalarTarget> targets,
                                                     const Points& inputs,
                                                     std::span<const double> baseline,
                                                     const Points& samples,
                                                     const KnnPathConfig& config = {},
                                                     EdgeRule rule = EdgeRule::gradient);

}  // namespace gig
