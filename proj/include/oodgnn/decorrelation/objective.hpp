#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "oodgnn/decorrelation/rff.hpp"

namespace oodgnn::decorrelation {

using DimPair = std::pair<std::size_t, std::size_t>;

// Weighted partial cross-covariance between two scalar samples mapped through
// f and g:
//
//   C = 1/(N-1) sum_n (w_n f(zi_n) - fbar)^T (w_n g(zj_n) - gbar),
//   fbar = 1/N sum_m w_m f(zi_m),  gbar likewise.
//
// The centering term divides by N, not by sum(w). Returns Q x Q.
Dense2D weighted_partial_cov(std::span<const double> zi, std::span<const double> zj,
                             std::span<const double> weights, const RFFBank& f_bank,
                             const RFFBank& g_bank);

// Same formula on already-mapped features (rows = samples).
Dense2D weighted_partial_cov_mapped(const Dense2D& f_features, const Dense2D& g_features,
                                    std::span<const double> weights);

// Sum over pairs of squared Frobenius norms of the weighted partial
// cross-covariance of columns (i, j) of Z.
double decorrelation_objective(const Dense2D& z, std::span<const double> weights,
                               const FeatureMaps& maps, std::span<const DimPair> pairs);

// Gradient of decorrelation_objective + l2_lambda * ||w||^2 with respect to w.
std::vector<double> objective_grad_weights(const Dense2D& z, std::span<const double> weights,
                                           const FeatureMaps& maps,
                                           std::span<const DimPair> pairs, double l2_lambda);

// All C(d,2) pairs in lexicographic order when fraction = 1; otherwise all
// pairs among a seeded random subset of ceil(fraction * d) dimensions.
std::vector<DimPair> sample_pairs(std::size_t d, double fraction, std::uint64_t seed);

// Feature maps evaluated once for a fixed Z, so the objective and its gradient
// can be re-evaluated cheaply as the weights change. The objective is a
// quartic polynomial in w, and both value and gradient are computed in closed
// form through block matrix products over the involved dimensions.
class DecorrelationProblem {
 public:
  DecorrelationProblem(const Dense2D& z, const FeatureMaps& maps, std::vector<DimPair> pairs);

  std::size_t samples() const { return samples_; }
  const std::vector<DimPair>& pairs() const { return pairs_; }

  double value(std::span<const double> weights) const;
  // Gradient of value() only (no l2 term).
  std::vector<double> gradient(std::span<const double> weights) const;

  struct Evaluation {
    double value = 0.0;
    std::vector<double> gradient;
  };
  // value() and gradient() sharing one pass over the weighted moments.
  Evaluation evaluate(std::span<const double> weights) const;

 private:
  struct Moments {
    Dense2D cov;  // block matrix over involved dims, only pair blocks filled
    std::vector<double> sum_f, sum_g;
  };
  Moments moments(std::span<const double> weights) const;
  static double frobenius(const Moments& m);
  std::vector<double> gradient_from(const Moments& m, std::span<const double> weights) const;

  std::size_t samples_ = 0;
  std::size_t q_ = 0;
  std::vector<DimPair> pairs_;
  std::vector<std::size_t> slot_;  // dimension -> block index among involved dims
  Dense2D f_;                      // samples x (involved * q)
  Dense2D g_;
};

// Calls into the objective, gradient and weight optimizer since the last
// reset. Used to check that uniform-weight training never touches this module.
long invocation_count();
void reset_invocation_count();

}  // namespace oodgnn::decorrelation
