#include "oodgnn/graphdata/graph.hpp"

#include <algorithm>

#include "oodgnn/errors.hpp"

namespace oodgnn::graphdata {

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(num_nodes, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

void validate(const Graph& g) {
  if (g.num_nodes == 0) throw DataError("graph has no nodes");
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& [u, v] = g.edges[i];
    if (u == v) throw DataError("self-loop on node " + std::to_string(u));
    if (u >= g.num_nodes || v >= g.num_nodes) {
      throw DataError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                      ") has an endpoint outside [0, " + std::to_string(g.num_nodes) + ")");
    }
  }
  const auto normalized = normalize_edges(g.edges);
  if (normalized.size() != g.edges.size()) throw DataError("duplicate edge");
  if (g.features.rows() != g.num_nodes) {
    throw DataError("feature matrix " + g.features.shape_string() + " does not have " +
                    std::to_string(g.num_nodes) + " rows");
  }
}

void validate(const Dataset& d) {
  for (std::size_t i = 0; i < d.graphs.size(); ++i) {
    const Graph& g = d.graphs[i];
    try {
      validate(g);
    } catch (const DataError& e) {
      throw DataError("graph " + std::to_string(i) + ": " + e.what());
    }
    if (g.features.cols() != d.feature_dim) {
      throw DataError("graph " + std::to_string(i) + ": feature dim " +
                      std::to_string(g.features.cols()) + " != " + std::to_string(d.feature_dim));
    }
    if (d.task_kind == TaskKind::classification && (g.label < 0 || g.label >= d.num_classes)) {
      throw DataError("graph " + std::to_string(i) + ": label " + std::to_string(g.label) +
                      " outside [0, " + std::to_string(d.num_classes) + ")");
    }
  }
}

std::vector<Edge> normalize_edges(std::vector<Edge> edges) {
  for (auto& [u, v] : edges)
    if (u > v) std::swap(u, v);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::size_t count_triangles(const Graph& g) {
  const std::size_t n = g.num_nodes;
  std::vector<char> adj(n * n, 0);
  for (const auto& [u, v] : g.edges) {
    adj[u * n + v] = 1;
    adj[v * n + u] = 1;
  }
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!adj[a * n + b]) continue;
      for (std::size_t c = b + 1; c < n; ++c)
        if (adj[a * n + c] && adj[b * n + c]) ++count;
    }
  return count;
}

Dense2D one_hot_degree_features(const Graph& g, std::size_t max_degree) {
  Dense2D out(g.num_nodes, max_degree + 1);
  const auto deg = g.degrees();
  for (std::size_t v = 0; v < g.num_nodes; ++v) out(v, std::min(deg[v], max_degree)) = 1.0;
  return out;
}

}  // namespace oodgnn::graphdata
