#include "oodgnn/decorrelation/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::decorrelation {

namespace {

bool zero_variance(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

// Gaussian Gram matrix, N x N row-major.
std::vector<double> gram(std::span<const double> x, double sigma) {
  const std::size_t n = x.size();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> k(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const double diff = x[a] - x[b];
      k[a * n + b] = std::exp(-diff * diff * inv);
    }
  return k;
}

// H K H in place.
void double_center(std::vector<double>& k, std::size_t n) {
  std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      row_mean[a] += k[a * n + b];
      col_mean[b] += k[a * n + b];
    }
  for (std::size_t a = 0; a < n; ++a) {
    row_mean[a] /= static_cast<double>(n);
    col_mean[a] /= static_cast<double>(n);
    grand += row_mean[a];
  }
  grand /= static_cast<double>(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) k[a * n + b] += grand - row_mean[a] - col_mean[b];
}

void check_inputs(std::span<const double> x, std::span<const double> y,
                  std::optional<double> bandwidth) {
  if (x.size() != y.size()) throw DimensionError("hsic: samples of different length");
  if (x.size() < 4) throw DomainError("hsic: need N >= 4");
  if (bandwidth && !(*bandwidth > 0.0)) throw DomainError("hsic: bandwidth must be > 0");
}

}  // namespace

double median_bandwidth(std::span<const double> x) {
  std::vector<double> dists;
  dists.reserve(x.size() * (x.size() - 1) / 2);
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = a + 1; b < x.size(); ++b) dists.push_back(std::abs(x[a] - x[b]));
  if (dists.empty()) return 1.0;
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  if (*mid > 0.0) return *mid;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  return sd > 0.0 ? sd : 1.0;
}

HsicResult hsic_gaussian(std::span<const double> x, std::span<const double> y,
                         std::optional<double> bandwidth) {
  check_inputs(x, y, bandwidth);
  if (zero_variance(x) || zero_variance(y)) return {0.0, true};
  const std::size_t n = x.size();
  std::vector<double> k = gram(x, bandwidth.value_or(median_bandwidth(x)));
  const std::vector<double> l = gram(y, bandwidth.value_or(median_bandwidth(y)));
  double_center(k, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) acc += k[i] * l[i];
  return {std::max(0.0, acc / static_cast<double>(n * n)), false};
}

PermutationTestResult hsic_permutation_test(std::span<const double> x, std::span<const double> y,
                                            int shuffles, std::uint64_t seed, double alpha,
                                            std::optional<double> bandwidth) {
  check_inputs(x, y, bandwidth);
  if (shuffles < 1) throw DomainError("hsic_permutation_test: need at least one shuffle");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("hsic_permutation_test: alpha in (0,1)");
  PermutationTestResult result;
  if (zero_variance(x) || zero_variance(y)) {
    result.degenerate = true;
    return result;
  }
  const std::size_t n = x.size();
  std::vector<double> k = gram(x, bandwidth.value_or(median_bandwidth(x)));
  const std::vector<double> l = gram(y, bandwidth.value_or(median_bandwidth(y)));
  double_center(k, n);
  // trace(HKH L_pi) with L_pi[a][b] = L[pi(a)][pi(b)]; centering K once suffices.
  auto statistic = [&](const std::vector<std::size_t>& perm) {
    double acc = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double* krow = k.data() + a * n;
      const double* lrow = l.data() + perm[a] * n;
      for (std::size_t b = 0; b < n; ++b) acc += krow[b] * lrow[perm[b]];
    }
    return acc / static_cast<double>(n * n);
  };
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  result.statistic = std::max(0.0, statistic(perm));

  Rng rng(seed);
  std::vector<double> null(static_cast<std::size_t>(shuffles));
  std::size_t at_least = 0;
  for (double& v : null) {
    rng.shuffle(perm.begin(), perm.end());
    v = statistic(perm);
    if (v >= result.statistic) ++at_least;
  }
  std::sort(null.begin(), null.end());
  const auto idx = static_cast<std::size_t>(
      std::ceil((1.0 - alpha) * static_cast<double>(shuffles))) - 1;
  result.threshold = null[std::min(idx, null.size() - 1)];
  result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + shuffles);
  result.significant = result.statistic > result.threshold;
  return result;
}

}  // namespace oodgnn::decorrelation
