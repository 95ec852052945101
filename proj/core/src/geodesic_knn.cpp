#include "gig/geodesic_knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>
#include <utility>

#include "gig/csv.hpp"
#include "gig/errors.hpp"

namespace gig {

namespace {

constexpr std::size_t kNoParent = std::numeric_limits<std::size_t>::max();

void add_edge(GeodesicGraph& graph, std::size_t i, std::size_t j, double weight) {
  auto insert = [&](std::size_t from, std::size_t to) {
    auto& list = graph.adjacency[from];
    auto it = std::lower_bound(list.begin(), list.end(), to,
                               [](const GraphEdge& e, std::size_t v) { return e.to < v; });
    if (it != list.end() && it->to == to) {
      it->weight = weight;
    } else {
      list.insert(it, GraphEdge{to, weight});
    }
  };
  insert(i, j);
  insert(j, i);
}

using QueueEntry = std::pair<double, std::size_t>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

ShortestPathResult trace_back(const std::vector<std::size_t>& parent,
                              const std::vector<double>& dist, std::size_t source,
                              std::size_t sink) {
  ShortestPathResult out;
  for (std::size_t v = sink; v != kNoParent; v = parent[v]) {
    out.nodes.push_back(v);
    if (v == source) break;
  }
  std::reverse(out.nodes.begin(), out.nodes.end());
  out.total_weight = dist[sink];
  return out;
}

void check_node(const GeodesicGraph& graph, std::size_t v) {
  if (v >= graph.size()) throw ArgumentError("node index " + std::to_string(v) + " out of range");
}

ShortestPathResult run_astar(const GeodesicGraph& graph, std::size_t source, std::size_t sink) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < graph.size(); ++u) {
    for (const GraphEdge& e : graph.adjacency[u]) {
      const double len = distance(graph.nodes[u], graph.nodes[e.to]);
      if (len > 0.0) alpha = std::min(alpha, e.weight / len);
    }
  }
  if (!std::isfinite(alpha)) alpha = 0.0;
  auto h = [&](std::size_t v) { return alpha * distance(graph.nodes[v], graph.nodes[sink]); };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(graph.size(), inf);
  std::vector<std::size_t> parent(graph.size(), kNoParent);
  MinQueue open;
  g[source] = 0.0;
  open.emplace(h(source), source);
  // Nodes may be re-expanded, so rounding in h cannot cost optimality.
  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (u == sink) break;
    if (f > g[u] + h(u)) continue;
    for (const GraphEdge& e : graph.adjacency[u]) {
      const double cand = g[u] + e.weight;
      if (cand < g[e.to]) {
        g[e.to] = cand;
        parent[e.to] = u;
        open.emplace(cand + h(e.to), e.to);
      }
    }
  }
  if (!std::isfinite(g[sink])) throw ConnectivityError("sink is unreachable from source");
  return trace_back(parent, g, source, sink);
}

}  // namespace

std::size_t GeodesicGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& list : adjacency) n += list.size();
  return n / 2;
}

std::size_t GeodesicGraph::num_components() const {
  if (component_id.empty()) return nodes.empty() ? 0 : 1;
  return *std::max_element(component_id.begin(), component_id.end()) + 1;
}

bool GeodesicGraph::has_edge(std::size_t i, std::size_t j) const {
  if (i >= adjacency.size()) return false;
  const auto& list = adjacency[i];
  return std::binary_search(list.begin(), list.end(), GraphEdge{j, 0.0},
                            [](const GraphEdge& a, const GraphEdge& b) { return a.to < b.to; });
}

double GeodesicGraph::weight(std::size_t i, std::size_t j) const {
  if (i < adjacency.size()) {
    for (const GraphEdge& e : adjacency[i]) {
      if (e.to == j) return e.weight;
    }
  }
  throw ArgumentError("(" + std::to_string(i) + ", " + std::to_string(j) + ") is not an edge");
}

GeodesicGraph build_knn_graph(const Points& points, std::size_t k) {
  const std::size_t n = points.size();
  if (k < 1 || k >= n) {
    throw ArgumentError("k = " + std::to_string(k) + " must satisfy 1 <= k < " + std::to_string(n));
  }
  for (const Vec& p : points) {
    if (p.size() != points.front().size()) throw ShapeError("graph points differ in dimension");
  }
  GeodesicGraph graph;
  graph.nodes = points;
  graph.k = k;
  graph.adjacency.resize(n);

  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) {
        const double d = points[i][c] - points[j][c];
        s += d * d;
      }
      cand.emplace_back(s, j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = cand[r].second;
      if (!graph.has_edge(i, j)) add_edge(graph, i, j, 0.0);
    }
  }
  label_components(graph);
  return graph;
}

double edge_weight(const MlpModel& model, const ScalarTarget& target, std::span<const double> a,
                   std::span<const double> b, std::size_t m_edge) {
  if (m_edge == 0) throw ArgumentError("edge weight needs m_edge >= 1");
  if (a.size() != b.size()) throw ShapeError("edge endpoints differ in dimension");
  const double len = distance(a, b);
  if (len == 0.0) return 0.0;
  Vec point(a.size());
  double norm_sum = 0.0;
  for (std::size_t k = 0; k < m_edge; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(m_edge);
    for (std::size_t i = 0; i < a.size(); ++i) point[i] = a[i] + t * (b[i] - a[i]);
    norm_sum += norm2(input_gradient(model, point, target));
  }
  return len * (norm_sum / static_cast<double>(m_edge));
}

EdgeWeightFn gradient_edge_weight(const MlpModel& model, const ScalarTarget& target,
                                  std::size_t m_edge) {
  return [&model, target, m_edge](std::span<const double> a, std::span<const double> b) {
    return edge_weight(model, target, a, b, m_edge);
  };
}

EdgeWeightFn euclidean_edge_weight() {
  return [](std::span<const double> a, std::span<const double> b) { return distance(a, b); };
}

void assign_weights(GeodesicGraph& graph, const EdgeWeightFn& weight_fn) {
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (GraphEdge& e : graph.adjacency[i]) {
      if (e.to < i) continue;
      const double w = weight_fn(graph.nodes[i], graph.nodes[e.to]);
      if (!std::isfinite(w) || w < 0.0) throw Error("edge weight must be finite and >= 0");
      e.weight = w;
      for (GraphEdge& back : graph.adjacency[e.to]) {
        if (back.to == i) back.weight = w;
      }
    }
  }
}

void label_components(GeodesicGraph& graph) {
  const std::size_t n = graph.size();
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  graph.component_id.assign(n, unset);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    if (graph.component_id[s] != unset) continue;
    graph.component_id[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const GraphEdge& e : graph.adjacency[u]) {
        if (graph.component_id[e.to] == unset) {
          graph.component_id[e.to] = next;
          stack.push_back(e.to);
        }
      }
    }
    ++next;
  }
}

GeodesicGraph connect_components(GeodesicGraph graph, const EdgeWeightFn& weight_fn) {
  label_components(graph);
  const std::size_t n = graph.size();
  while (graph.num_components() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (graph.component_id[i] == graph.component_id[j]) continue;
        double s = 0.0;
        for (std::size_t c = 0; c < graph.nodes[i].size(); ++c) {
          const double d = graph.nodes[i][c] - graph.nodes[j][c];
          s += d * d;
        }
        if (s < best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    }
    const double w = weight_fn(graph.nodes[bi], graph.nodes[bj]);
    add_edge(graph, bi, bj, w);
    graph.bridges.push_back(Bridge{bi, bj, w});
    label_components(graph);
  }
  return graph;
}

GeodesicGraph build_geodesic_graph(const Points& nodes, std::size_t k, std::size_t m_edge,
                                   const EdgeWeightFn& weight_fn) {
  GeodesicGraph graph = build_knn_graph(nodes, k);
  graph.m_edge = m_edge;
  assign_weights(graph, weight_fn);
  return connect_components(std::move(graph), weight_fn);
}

void write_graph_csv(const GeodesicGraph& graph, const std::filesystem::path& file) {
  CsvWriter csv(file, "i,j,weight,is_bridge");
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (const GraphEdge& e : graph.adjacency[i]) {
      if (e.to < i) continue;
      const bool bridge = std::any_of(graph.bridges.begin(), graph.bridges.end(), [&](const Bridge& b) {
        return (b.a == i && b.b == e.to) || (b.a == e.to && b.b == i);
      });
      csv.field(i).field(e.to).field(e.weight).field(bridge ? 1 : 0);
      csv.end_row();
    }
  }
}

bool ShortestPathTree::reachable(std::size_t node) const {
  return node < distance.size() && std::isfinite(distance[node]);
}

ShortestPathResult ShortestPathTree::path_to(std::size_t node) const {
  if (!reachable(node)) throw ConnectivityError("node is unreachable from the tree source");
  return trace_back(parent, distance, source, node);
}

ShortestPathTree shortest_path_tree(const GeodesicGraph& graph, std::size_t source) {
  check_node(graph, source);
  ShortestPathTree tree;
  tree.source = source;
  tree.distance.assign(graph.size(), std::numeric_limits<double>::infinity());
  tree.parent.assign(graph.size(), kNoParent);
  std::vector<char> done(graph.size(), 0);
  MinQueue queue;
  tree.distance[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const GraphEdge& e : graph.adjacency[u]) {
      if (done[e.to]) continue;
      const double cand = d + e.weight;
      if (cand < tree.distance[e.to]) {
        tree.distance[e.to] = cand;
        tree.parent[e.to] = u;
        queue.emplace(cand, e.to);
      }
    }
  }
  return tree;
}

ShortestPathResult shortest_path(const GeodesicGraph& graph, std::size_t source, std::size_t sink,
                                 ShortestPathAlgorithm algorithm) {
  check_node(graph, source);
  check_node(graph, sink);
  if (source == sink) return ShortestPathResult{{source}, 0.0};
  if (algorithm == ShortestPathAlgorithm::astar) return run_astar(graph, source, sink);
  const ShortestPathTree tree = shortest_path_tree(graph, source);
  if (!tree.reachable(sink)) throw ConnectivityError("sink is unreachable from source");
  return tree.path_to(sink);
}

PathAttributionResult geodesic_ig_knn(const MlpModel& model, const ScalarTarget& target,
                                      std::span<const double> input,
                                      std::span<const double> baseline, const Points& samples,
                                      const KnnPathConfig& config, EdgeRule rule) {
  Points nodes = samples;
  nodes.emplace_back(baseline.begin(), baseline.end());
  nodes.emplace_back(input.begin(), input.end());
  const std::size_t source = nodes.size() - 2;
  const std::size_t sink = nodes.size() - 1;

  const EdgeWeightFn weight_fn = rule == EdgeRule::gradient
                                     ? gradient_edge_weight(model, target, config.m_edge)
                                     : euclidean_edge_weight();
  const GeodesicGraph graph = build_geodesic_graph(nodes, config.k, config.m_edge, weight_fn);
  const ShortestPathResult route = shortest_path(graph, source, sink, config.algorithm);

  PathAttributionResult out;
  out.path.steps_per_segment = config.m_attr;
  for (std::size_t v : route.nodes) out.path.anchors.push_back(graph.nodes[v]);
  out.attribution = path_attribution(model, target, out.path);
  out.bridges = graph.bridges;
  return out;
}

std::vector<PathAttributionResult> explain_knn_batch(const MlpModel& model,
                                                     std::span<const ScalarTarget> targets,
                                                     const Points& inputs,
                                                     std::span<const double> baseline,
                                                     const Points& samples,
                                                     const KnnPathConfig& config,
                                                     EdgeRule rule) {
  if (targets.size() != inputs.size()) {
    throw ArgumentError("need exactly one target per input");
  }
  Points nodes = samples;
  const std::size_t source = nodes.size();
  nodes.emplace_back(baseline.begin(), baseline.end());

  // Inputs that coincide with an existing node reuse it.
  std::map<Vec, std::size_t> index_of;
  for (std::size_t i = 0; i < nodes.size(); ++i) index_of.emplace(nodes[i], i);
  std::vector<std::size_t> input_node(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto [it, inserted] = index_of.emplace(inputs[i], nodes.size());
    if (inserted) nodes.push_back(inputs[i]);
    input_node[i] = it->second;
  }

  const GeodesicGraph unweighted = build_knn_graph(nodes, config.k);

  // Gradient weights depend on the explained class, Euclidean ones do not.
  std::map<std::pair<std::size_t, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto key = rule == EdgeRule::gradient
                         ? std::make_pair(targets[i].class_index, static_cast<int>(targets[i].space))
                         : std::make_pair(std::size_t{0}, 0);
    groups[key].push_back(i);
  }

  std::vector<PathAttributionResult> results(inputs.size());
  for (const auto& [key, members] : groups) {
    const ScalarTarget group_target = targets[members.front()];
    const EdgeWeightFn weight_fn = rule == EdgeRule::gradient
                                       ? gradient_edge_weight(model, group_target, config.m_edge)
                                       : euclidean_edge_weight();
    GeodesicGraph graph = unweighted;
    graph.m_edge = config.m_edge;
    assign_weights(graph, weight_fn);
    graph = connect_components(std::move(graph), weight_fn);

    if (config.algorithm == ShortestPathAlgorithm::astar) {
      for (std::size_t i : members) {
        const ShortestPathResult route =
            shortest_path(graph, source, input_node[i], ShortestPathAlgorithm::astar);
        PathAttributionResult& out = results[i];
        out.path.steps_per_segment = config.m_attr;
        for (std::size_t v : route.nodes) out.path.anchors.push_back(graph.nodes[v]);
        if (out.path.anchors.size() == 1) out.path.anchors.push_back(out.path.anchors.front());
        out.attribution = path_attribution(model, targets[i], out.path);
        out.bridges = graph.bridges;
      }
      continue;
    }

    const ShortestPathTree tree = shortest_path_tree(graph, source);
    // Prefix integrals from the baseline, keyed by (class, output space, node).
    std::map<std::tuple<std::size_t, int, std::size_t>, std::pair<Vec, double>> prefix;
    const std::size_t d = baseline.size();
    for (std::size_t i : members) {
      const ScalarTarget& target = targets[i];
      const ShortestPathResult route = tree.path_to(input_node[i]);
      PathAttributionResult& out = results[i];
      out.path.steps_per_segment = config.m_attr;
      for (std::size_t v : route.nodes) out.path.anchors.push_back(graph.nodes[v]);
      if (out.path.anchors.size() == 1) out.path.anchors.push_back(out.path.anchors.front());
      out.bridges = graph.bridges;

      Vec values(d, 0.0);
      double length = 0.0;
      if (route.nodes.size() == 1) {
        const SegmentIntegral seg =
            integrate_segment(model, target, graph.nodes[source], graph.nodes[source], config.m_attr);
        for (std::size_t c = 0; c < d; ++c) values[c] += seg.attribution[c];
        length += seg.weighted_length;
      }
      for (std::size_t s = 1; s < route.nodes.size(); ++s) {
        const auto key_node = std::make_tuple(target.class_index, static_cast<int>(target.space),
                                              route.nodes[s]);
        auto it = prefix.find(key_node);
        if (it == prefix.end()) {
          const SegmentIntegral seg = integrate_segment(
              model, target, graph.nodes[route.nodes[s - 1]], graph.nodes[route.nodes[s]],
              config.m_attr);
          for (std::size_t c = 0; c < d; ++c) values[c] += seg.attribution[c];
          length += seg.weighted_length;
          it = prefix.emplace(key_node, std::make_pair(values, length)).first;
        } else {
          values = it->second.first;
          length = it->second.second;
        }
      }
      out.attribution = make_attribution(std::move(values),
                                         scalar_output(model, graph.nodes[input_node[i]], target),
                                         scalar_output(model, baseline, target), length);
    }
  }
  return results;
}

}  // namespace gig
