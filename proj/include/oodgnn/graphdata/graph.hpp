#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "oodgnn/numcore/dense.hpp"

namespace oodgnn::graphdata {

using numcore::Dense2D;

// Undirected edge, stored with first < second.
using Edge = std::pair<std::size_t, std::size_t>;

enum class TaskKind { classification, regression };

struct Graph {
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  Dense2D features;  // num_nodes x feature_dim
  int label = 0;
  double target = 0.0;  // regression tasks only

  std::vector<std::size_t> degrees() const;
};

struct Dataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  std::size_t feature_dim = 0;
  TaskKind task_kind = TaskKind::classification;

  std::size_t size() const { return graphs.size(); }
};

// Throws DataError naming the first violated invariant (self-loop, duplicate
// edge, endpoint out of range, feature row count).
void validate(const Graph& g);
void validate(const Dataset& d);

// Sorts endpoints within each edge and the edge list itself, dropping
// duplicates. Self-loops are left for validate() to reject.
std::vector<Edge> normalize_edges(std::vector<Edge> edges);

// Exact number of node triples with all three edges present. Enumerates every
// triple, so cost is cubic in the node count.
std::size_t count_triangles(const Graph& g);

// [num_nodes x (max_degree + 1)] one-hot degree encoding. Degrees above the
// cap fall into the last bucket.
Dense2D one_hot_degree_features(const Graph& g, std::size_t max_degree);

}  // namespace oodgnn::graphdata
