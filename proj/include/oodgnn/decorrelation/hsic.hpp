#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace oodgnn::decorrelation {

struct HsicResult {
  double statistic = 0.0;
  bool degenerate = false;  // an input had zero variance; statistic forced to 0
};

// Median of |x_a - x_b| over a < b; falls back to the standard deviation when
// the median is 0.
double median_bandwidth(std::span<const double> x);

// Biased estimator (1/N^2) trace(K H L H) with Gaussian kernels
// exp(-(a-b)^2 / (2 sigma^2)) and H = I - (1/N) 1 1^T. When bandwidth is
// unset, each variable gets its own median-heuristic bandwidth. Requires N >= 4.
HsicResult hsic_gaussian(std::span<const double> x, std::span<const double> y,
                         std::optional<double> bandwidth = std::nullopt);

struct PermutationTestResult {
  double statistic = 0.0;
  double threshold = 0.0;  // (1 - alpha) quantile of the permuted statistics
  double p_value = 1.0;
  bool significant = false;  // statistic > threshold
  bool degenerate = false;
};

// Null distribution from `shuffles` random permutations of y.
PermutationTestResult hsic_permutation_test(std::span<const double> x, std::span<const double> y,
                                            int shuffles, std::uint64_t seed,
                                            double alpha = 0.05,
                                            std::optional<double> bandwidth = std::nullopt);

}  // namespace oodgnn::decorrelation
