#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oodgnn/decorrelation/objective.hpp"

namespace oodgnn::decorrelation {

inline constexpr double kWeightFloor = 1e-4;

// Per-sample weights constrained to sum(w) = N and w >= kWeightFloor.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> values) : values_(std::move(values)) {}
  static WeightVector uniform(std::size_t n) { return WeightVector(std::vector<double>(n, 1.0)); }

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double sum() const;
  double min() const;
  // |sum - N| <= tol and every entry >= kWeightFloor.
  bool satisfies_constraints(double tol = 1e-6) const;

 private:
  std::vector<double> values_;
};

// Clamp every entry to the floor and rescale the unclamped entries so the sum
// is N; repeats until no rescaled entry drops below the floor.
void project_weights(std::span<double> w, double floor = kWeightFloor);

struct ReweightConfig {
  int epochs_reweight = 20;
  double lr_w = 0.01;
  double l2_lambda = 1.0;
  std::size_t q = 1;
  double pair_fraction = 1.0;
  std::uint64_t seed = 0;
  FeatureMapKind feature_map = FeatureMapKind::random_fourier;

  // Throws ConfigError if a field is out of range.
  void validate() const;
};

struct ReweightResult {
  WeightVector weights;
  double initial_objective = 0.0;  // decorrelation + l2 at w0
  double final_objective = 0.0;
  double final_decorrelation = 0.0;  // decorrelation term alone
  bool warning = false;              // final objective exceeded the initial one
  std::vector<double> objective_trace;  // after each step
};

// Plain projected gradient descent on decorrelation(w) + l2_lambda ||w||^2.
// Feature maps and pairs are drawn once from cfg.seed. Returns w0 unchanged
// when epochs_reweight is 0.
ReweightResult optimize_weights(const Dense2D& z, const WeightVector& w0,
                                const ReweightConfig& cfg);

// Variant over a concatenated sample set whose leading rows carry frozen
// weights: z has fixed_weights.size() + w0.size() rows and only the trailing
// w0 entries are optimized (and constrained to sum to w0.size()).
ReweightResult optimize_weights(const Dense2D& z, std::span<const double> fixed_weights,
                                const WeightVector& w0, const ReweightConfig& cfg);

}  // namespace oodgnn::decorrelation
