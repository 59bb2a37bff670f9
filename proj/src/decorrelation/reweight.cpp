#include "oodgnn/decorrelation/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "oodgnn/errors.hpp"

namespace oodgnn::decorrelation {

double WeightVector::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double WeightVector::min() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

bool WeightVector::satisfies_constraints(double tol) const {
  return std::abs(sum() - static_cast<double>(size())) <= tol && min() >= kWeightFloor;
}

void project_weights(std::span<double> w, double floor) {
  const double target = static_cast<double>(w.size());
  if (w.empty()) return;
  if (floor * target >= target) throw DomainError("project_weights: floor must be below 1");
  std::vector<char> pinned(w.size(), 0);
  for (;;) {
    std::size_t pinned_count = 0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (!pinned[k] && !(w[k] >= floor)) pinned[k] = 1;
      if (pinned[k]) {
        w[k] = floor;
        ++pinned_count;
      }
    }
    double free_sum = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
      if (!pinned[k]) free_sum += w[k];
    if (pinned_count == w.size() || free_sum <= 0.0) {
      // Everything hit the floor; spread the remainder uniformly.
      std::fill(w.begin(), w.end(), 1.0);
      return;
    }
    const double scale = (target - floor * static_cast<double>(pinned_count)) / free_sum;
    bool dropped = false;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (pinned[k]) continue;
      w[k] *= scale;
      if (w[k] < floor) dropped = true;
    }
    if (!dropped) return;
  }
}

void ReweightConfig::validate() const {
  if (epochs_reweight < 0) throw ConfigError("epochs_reweight must be >= 0");
  if (!(lr_w > 0.0)) throw ConfigError("lr_w must be > 0");
  if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be >= 0");
  if (q < 1) throw ConfigError("q must be >= 1");
  if (!(pair_fraction > 0.0 && pair_fraction <= 1.0)) {
    throw ConfigError("pair_fraction must lie in (0, 1]");
  }
}

ReweightResult optimize_weights(const Dense2D& z, const WeightVector& w0,
                                const ReweightConfig& cfg) {
  return optimize_weights(z, std::span<const double>{}, w0, cfg);
}

ReweightResult optimize_weights(const Dense2D& z, std::span<const double> fixed_weights,
                                const WeightVector& w0, const ReweightConfig& cfg) {
  cfg.validate();
  const std::size_t fixed = fixed_weights.size();
  if (z.rows() != fixed + w0.size()) {
    throw DimensionError("optimize_weights: Z " + z.shape_string() + " for " +
                         std::to_string(fixed) + " fixed + " + std::to_string(w0.size()) +
                         " free weights");
  }
  ReweightResult result;
  result.weights = w0;
  if (cfg.epochs_reweight == 0) return result;
  detail::note_invocation();

  Rng rng(mix_seed(cfg.seed, 0));
  const FeatureMaps maps = cfg.feature_map == FeatureMapKind::identity
                               ? FeatureMaps::identity(z.cols())
                               : FeatureMaps::sample(z.cols(), cfg.q, rng);
  const DecorrelationProblem problem(z, maps,
                                     sample_pairs(z.cols(), cfg.pair_fraction, mix_seed(cfg.seed, 1)));

  std::vector<double> all(fixed_weights.begin(), fixed_weights.end());
  all.insert(all.end(), w0.values().begin(), w0.values().end());
  const std::span<double> local(all.data() + fixed, w0.size());

  auto l2 = [&] {
    double s = 0.0;
    for (double v : local) s += v * v;
    return cfg.l2_lambda * s;
  };
  // Evaluates the objective at the current weights along with the gradient
  // that the next step will use.
  auto evaluate = [&](int iteration) {
    auto eval = problem.evaluate(all);
    const double value = eval.value + l2();
    if (!std::isfinite(value)) {
      throw OptimizationError("optimize_weights: non-finite objective at iteration " +
                                  std::to_string(iteration),
                              iteration);
    }
    return std::pair{value, std::move(eval)};
  };

  auto [value, eval] = evaluate(0);
  result.initial_objective = value;
  for (int it = 1; it <= cfg.epochs_reweight; ++it) {
    const std::vector<double>& grad = eval.gradient;
    if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
      throw OptimizationError(
          "optimize_weights: non-finite gradient at iteration " + std::to_string(it), it);
    }
    for (std::size_t k = 0; k < local.size(); ++k) {
      local[k] -= cfg.lr_w * (grad[fixed + k] + 2.0 * cfg.l2_lambda * local[k]);
    }
    project_weights(local);
    std::tie(value, eval) = evaluate(it);
    result.objective_trace.push_back(value);
  }
  const double decor = eval.value;
  result.final_objective = value;
  result.final_decorrelation = decor;
  result.warning = result.final_objective > result.initial_objective;
  result.weights = WeightVector(std::vector<double>(local.begin(), local.end()));
  return result;
}

}  // namespace oodgnn::decorrelation
