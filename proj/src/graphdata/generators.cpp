#include "oodgnn/graphdata/generators.hpp"

#include <algorithm>

#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::graphdata {

namespace {

std::vector<Edge> sample_edges(std::size_t n, double edge_prob, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.uniform() < edge_prob) edges.emplace_back(u, v);
  return edges;
}

constexpr double kDensityLo = 2.0;
constexpr double kDensityHi = 5.0;

}  // namespace

Graph gen_random_graph(std::size_t n, double edge_prob, std::uint64_t rng_seed) {
  if (n == 0) throw DomainError("gen_random_graph: n must be >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw DomainError("gen_random_graph: edge_prob " + std::to_string(edge_prob) +
                      " outside [0, 1]");
  }
  Rng rng(rng_seed);
  Graph g;
  g.num_nodes = n;
  g.edges = sample_edges(n, edge_prob, rng);
  g.features = one_hot_degree_features(g, kDegreeCap);
  return g;
}

Dataset gen_triangles_dataset(std::size_t count, std::size_t min_nodes, std::size_t max_nodes,
                              std::uint64_t rng_seed) {
  if (count == 0) throw DomainError("gen_triangles_dataset: count must be >= 1");
  if (min_nodes < 3 || min_nodes > max_nodes) {
    throw DomainError("gen_triangles_dataset: need 3 <= min_nodes <= max_nodes, got [" +
                      std::to_string(min_nodes) + ", " + std::to_string(max_nodes) + "]");
  }

  Dataset d;
  d.num_classes = kTriangleClasses;
  d.feature_dim = kDegreeCap + 1;
  d.task_kind = TaskKind::classification;
  d.graphs.reserve(count);

  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(mix_seed(rng_seed, i));
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxAttemptsPerGraph && !accepted; ++attempt) {
      const auto n = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(min_nodes), static_cast<std::int64_t>(max_nodes)));
      const double p =
          std::min(1.0, rng.uniform(kDensityLo, kDensityHi) / static_cast<double>(n));
      Graph g;
      g.num_nodes = n;
      g.edges = sample_edges(n, p, rng);
      const std::size_t triangles = count_triangles(g);
      if (triangles < 1 || triangles > static_cast<std::size_t>(kTriangleClasses)) continue;
      g.label = static_cast<int>(triangles) - 1;
      g.features = one_hot_degree_features(g, kDegreeCap);
      d.graphs.push_back(std::move(g));
      accepted = true;
    }
    if (!accepted) {
      throw GenerationError("gen_triangles_dataset: no graph with 1..10 triangles after " +
                            std::to_string(kMaxAttemptsPerGraph) + " attempts (graph " +
                            std::to_string(i) + ", nodes [" + std::to_string(min_nodes) + ", " +
                            std::to_string(max_nodes) + "], seed " + std::to_string(rng_seed) +
                            ")");
    }
  }
  return d;
}

}  // namespace oodgnn::graphdata
