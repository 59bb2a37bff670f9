#pragma once

#include <cstdint>

#include "oodgnn/graphdata/graph.hpp"

namespace oodgnn::graphdata {

// Degree one-hot cap shared by train and test splits so feature_dim is fixed.
inline constexpr std::size_t kDegreeCap = 32;
inline constexpr int kTriangleClasses = 10;
inline constexpr int kMaxAttemptsPerGraph = 100000;

// Erdos-Renyi G(n, p): every unordered pair is included independently with
// probability edge_prob. Features are one-hot degrees capped at kDegreeCap.
Graph gen_random_graph(std::size_t n, double edge_prob, std::uint64_t rng_seed);

// Random graphs with 1..10 triangles, labelled (triangle count - 1). Node count
// is uniform in [min_nodes, max_nodes]; edge probability is min(1, c / n) with
// c uniform in [2, 5], which keeps the expected triangle count independent of
// n. Graphs outside the label range are regenerated. Graph i draws from a seed
// derived from (rng_seed, i).
Dataset gen_triangles_dataset(std::size_t count, std::size_t min_nodes, std::size_t max_nodes,
                              std::uint64_t rng_seed);

}  // namespace oodgnn::graphdata
