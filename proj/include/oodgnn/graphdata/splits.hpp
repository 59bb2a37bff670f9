#pragma once

#include <cstdint>
#include <utility>

#include "oodgnn/graphdata/graph.hpp"

namespace oodgnn::graphdata {

enum class SplitKind { by_size, by_feature_noise };

struct SplitSpec {
  SplitKind kind = SplitKind::by_size;
  std::size_t train_max_nodes = 25;
  double noise_sigma = 0.4;
  double test_fraction = 0.2;  // by_feature_noise only
  std::uint64_t seed = 0;
};

struct TrainTest {
  Dataset train;
  Dataset test;
};

// Graphs with num_nodes <= train_max_nodes go to train, the rest to test, in
// input order. Throws SplitError if either side is empty.
TrainTest split_by_size(const Dataset& d, std::size_t train_max_nodes);

// Copy of d with i.i.d. N(0, sigma^2) noise added to every feature entry.
// Structures and labels are untouched.
Dataset add_feature_noise(const Dataset& d, double sigma, std::uint64_t rng_seed);

// Seeded random holdout: round(fraction * size) graphs go to the second part.
TrainTest split_holdout(const Dataset& d, double fraction, std::uint64_t seed);

TrainTest apply_split(const Dataset& d, const SplitSpec& spec);

}  // namespace oodgnn::graphdata
