#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>

namespace gig::testing {

namespace {

constexpr std::size_t kSizes[] = {2, 64, 64, 2};

MoonsSetup make_setup(std::size_t n, double noise, std::uint64_t seed, std::size_t epochs) {
  const Dataset ds = make_moons(n, noise, seed);
  auto [train_set, test_set] = split(ds, 0.8, seed);
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.epochs = epochs;
  MoonsSetup s;
  s.model = gig::train(MlpModel::random(kSizes, seed), train_set, cfg).model;
  s.test_accuracy = accuracy(s.model, test_set);
  s.train = std::move(train_set);
  s.test = std::move(test_set);
  return s;
}

void dfs(const GeodesicGraph& g, std::size_t v, std::size_t sink, double acc,
         std::vector<bool>& on_path, double& best) {
  if (v == sink) {
    best = std::min(best, acc);
    return;
  }
  for (const GraphEdge& e : g.adjacency[v]) {
    if (on_path[e.to]) continue;
    on_path[e.to] = true;
    dfs(g, e.to, sink, acc + e.weight, on_path, best);
    on_path[e.to] = false;
  }
}

}  // namespace

const MoonsSetup& small_moons() {
  static const MoonsSetup setup = make_setup(2000, 0.15, 0, 100);
  return setup;
}

const MoonsSetup& full_moons(double noise, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::pair<double, std::uint64_t>, std::unique_ptr<MoonsSetup>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{noise, seed}];
  if (!slot) slot = std::make_unique<MoonsSetup>(make_setup(10000, noise, seed, TrainConfig{}.epochs));
  return *slot;
}

Vec central_difference(const MlpModel& model, std::span<const double> x,
                       const ScalarTarget& target, double h) {
  Vec out(x.size());
  Vec probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = scalar_output(model, probe, target);
    probe[i] = x[i] - h;
    const double down = scalar_output(model, probe, target);
    probe[i] = x[i];
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
  }
  return worst;
}

double exhaustive_shortest_path(const GeodesicGraph& graph, std::size_t source, std::size_t sink) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> on_path(graph.size(), false);
  on_path[source] = true;
  dfs(graph, source, sink, 0.0, on_path, best);
  return best;
}

GeodesicGraph random_geometric_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::uniform_real_distribution<double> stretch(1.0, 3.0);
  std::bernoulli_distribution keep(p);
  GeodesicGraph g;
  g.nodes.resize(n);
  for (Vec& v : g.nodes) v = {coord(rng), coord(rng)};
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!keep(rng)) continue;
      const double w = distance(g.nodes[i], g.nodes[j]) * stretch(rng);
      g.adjacency[i].push_back({j, w});
      g.adjacency[j].push_back({i, w});
    }
  }
  label_components(g);
  return g;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace gig::testing
