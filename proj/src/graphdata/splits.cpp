#include "oodgnn/graphdata/splits.hpp"

#include <cmath>
#include <numeric>

#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::graphdata {

namespace {

Dataset empty_like(const Dataset& d) {
  Dataset out;
  out.num_classes = d.num_classes;
  out.feature_dim = d.feature_dim;
  out.task_kind = d.task_kind;
  return out;
}

}  // namespace

TrainTest split_by_size(const Dataset& d, std::size_t train_max_nodes) {
  TrainTest out{empty_like(d), empty_like(d)};
  for (const Graph& g : d.graphs)
    (g.num_nodes <= train_max_nodes ? out.train : out.test).graphs.push_back(g);
  if (out.train.graphs.empty() || out.test.graphs.empty()) {
    throw SplitError("split_by_size: cap " + std::to_string(train_max_nodes) + " leaves " +
                     std::to_string(out.train.size()) + " train / " +
                     std::to_string(out.test.size()) + " test graphs");
  }
  return out;
}

Dataset add_feature_noise(const Dataset& d, double sigma, std::uint64_t rng_seed) {
  if (!(sigma >= 0.0)) throw DomainError("add_feature_noise: sigma must be >= 0");
  Dataset out = d;
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < out.graphs.size(); ++i) {
    Rng rng(mix_seed(rng_seed, i));
    for (double& v : out.graphs[i].features.values()) v += rng.normal(0.0, sigma);
  }
  return out;
}

TrainTest split_holdout(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw DomainError("split_holdout: fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(d.size())));
  TrainTest out{empty_like(d), empty_like(d)};
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < order.size() - held ? out.train : out.test).graphs.push_back(d.graphs[order[k]]);
  if (out.train.graphs.empty() || out.test.graphs.empty()) {
    throw SplitError("split_holdout: fraction " + std::to_string(fraction) +
                     " leaves an empty side of " + std::to_string(d.size()) + " graphs");
  }
  return out;
}

TrainTest apply_split(const Dataset& d, const SplitSpec& spec) {
  switch (spec.kind) {
    case SplitKind::by_size:
      return split_by_size(d, spec.train_max_nodes);
    case SplitKind::by_feature_noise: {
      if (!(spec.noise_sigma >= 0.0)) throw DomainError("apply_split: noise_sigma must be >= 0");
      TrainTest parts = split_holdout(d, spec.test_fraction, spec.seed);
      parts.test = add_feature_noise(parts.test, spec.noise_sigma, mix_seed(spec.seed, 1));
      return parts;
    }
  }
  throw DomainError("apply_split: unknown split kind");
}

}  // namespace oodgnn::graphdata
