#include "oodgnn/decorrelation/objective.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::decorrelation {

namespace {

std::atomic<long> g_invocations{0};

void check_weights(const Dense2D& z, std::span<const double> weights) {
  if (weights.size() != z.rows()) {
    throw DimensionError("decorrelation: " + std::to_string(weights.size()) +
                         " weights for Z " + z.shape_string());
  }
  if (z.rows() < 2) throw DomainError("decorrelation: need at least 2 samples");
}

}  // namespace

namespace detail {
void note_invocation() { g_invocations.fetch_add(1, std::memory_order_relaxed); }
}  // namespace detail

long invocation_count() { return g_invocations.load(); }
void reset_invocation_count() { g_invocations.store(0); }

Dense2D weighted_partial_cov_mapped(const Dense2D& f_features, const Dense2D& g_features,
                                    std::span<const double> weights) {
  const std::size_t n = f_features.rows();
  if (g_features.rows() != n || weights.size() != n) {
    throw DimensionError("weighted_partial_cov: sample counts differ (" + std::to_string(n) +
                         ", " + std::to_string(g_features.rows()) + ", " +
                         std::to_string(weights.size()) + ")");
  }
  if (n < 2) throw DomainError("weighted_partial_cov: need N >= 2 (denominator N-1)");
  const std::size_t qf = f_features.cols(), qg = g_features.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> f_mean(qf, 0.0), g_mean(qg, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t a = 0; a < qf; ++a) f_mean[a] += weights[m] * f_features(m, a);
    for (std::size_t b = 0; b < qg; ++b) g_mean[b] += weights[m] * g_features(m, b);
  }
  for (double& v : f_mean) v *= inv_n;
  for (double& v : g_mean) v *= inv_n;

  Dense2D cov(qf, qg);
  std::vector<double> fc(qf), gc(qg);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < qf; ++a) fc[a] = weights[s] * f_features(s, a) - f_mean[a];
    for (std::size_t b = 0; b < qg; ++b) gc[b] = weights[s] * g_features(s, b) - g_mean[b];
    for (std::size_t a = 0; a < qf; ++a)
      for (std::size_t b = 0; b < qg; ++b) cov(a, b) += fc[a] * gc[b];
  }
  const double inv_dof = 1.0 / static_cast<double>(n - 1);
  for (double& v : cov.values()) v *= inv_dof;
  return cov;
}

Dense2D weighted_partial_cov(std::span<const double> zi, std::span<const double> zj,
                             std::span<const double> weights, const RFFBank& f_bank,
                             const RFFBank& g_bank) {
  if (zi.size() != zj.size()) {
    throw DimensionError("weighted_partial_cov: columns of length " + std::to_string(zi.size()) +
                         " and " + std::to_string(zj.size()));
  }
  if (zi.size() < 2) throw DomainError("weighted_partial_cov: need N >= 2 (denominator N-1)");
  return weighted_partial_cov_mapped(rff_map(zi, f_bank), rff_map(zj, g_bank), weights);
}

DecorrelationProblem::DecorrelationProblem(const Dense2D& z, const FeatureMaps& maps,
                                           std::vector<DimPair> pairs)
    : samples_(z.rows()), q_(maps.q()), pairs_(std::move(pairs)) {
  if (z.rows() < 2) throw DomainError("decorrelation: need at least 2 samples");
  if (maps.dims() != z.cols()) {
    throw DimensionError("decorrelation: feature maps for " + std::to_string(maps.dims()) +
                         " dims but Z is " + z.shape_string());
  }
  if (pairs_.empty()) throw DomainError("decorrelation: no dimension pairs");
  constexpr std::size_t kUnused = static_cast<std::size_t>(-1);
  slot_.assign(z.cols(), kUnused);
  std::vector<std::size_t> involved;
  for (const auto& [i, j] : pairs_) {
    if (!(i < j) || j >= z.cols()) {
      throw IndexError("decorrelation: pair (" + std::to_string(i) + "," + std::to_string(j) +
                       ") invalid for d = " + std::to_string(z.cols()));
    }
    for (std::size_t dim : {i, j}) {
      if (slot_[dim] == kUnused) {
        slot_[dim] = involved.size();
        involved.push_back(dim);
      }
    }
  }
  const std::size_t width = involved.size() * q_;
  f_ = Dense2D(samples_, width);
  g_ = Dense2D(samples_, width);
  for (std::size_t s = 0; s < involved.size(); ++s) {
    const std::size_t dim = involved[s];
    const auto col = numcore::column(z, dim);
    const Dense2D fm = maps.map_f(dim, col);
    const Dense2D gm = maps.map_g(dim, col);
    for (std::size_t n = 0; n < samples_; ++n)
      for (std::size_t k = 0; k < q_; ++k) {
        f_(n, s * q_ + k) = fm(n, k);
        g_(n, s * q_ + k) = gm(n, k);
      }
  }
}

DecorrelationProblem::Moments DecorrelationProblem::moments(
    std::span<const double> weights) const {
  if (weights.size() != samples_) {
    throw DimensionError("decorrelation: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(samples_) + " samples");
  }
  const std::size_t width = f_.cols();
  Moments m;
  m.sum_f.assign(width, 0.0);
  m.sum_g.assign(width, 0.0);
  Dense2D w2f = f_;
  for (std::size_t n = 0; n < samples_; ++n) {
    const double w = weights[n];
    auto frow = f_.row(n);
    auto grow = g_.row(n);
    auto srow = w2f.row(n);
    for (std::size_t c = 0; c < width; ++c) {
      m.sum_f[c] += w * frow[c];
      m.sum_g[c] += w * grow[c];
      srow[c] *= w * w;
    }
  }
  // sum_n w_n^2 f_n^T g_n over all blocks, then centering and masking to the
  // requested pairs.
  const Dense2D second = numcore::matmul_tn(w2f, g_);
  const double inv_n = 1.0 / static_cast<double>(samples_);
  const double inv_dof = 1.0 / static_cast<double>(samples_ - 1);
  m.cov = Dense2D(width, width);
  for (const auto& [i, j] : pairs_) {
    const std::size_t bi = slot_[i] * q_, bj = slot_[j] * q_;
    for (std::size_t a = 0; a < q_; ++a)
      for (std::size_t b = 0; b < q_; ++b) {
        const std::size_t r = bi + a, c = bj + b;
        m.cov(r, c) += inv_dof * (second(r, c) - inv_n * m.sum_f[r] * m.sum_g[c]);
      }
  }
  return m;
}

double DecorrelationProblem::frobenius(const Moments& m) {
  double total = 0.0;
  for (double v : m.cov.values()) total += v * v;
  return total;
}

double DecorrelationProblem::value(std::span<const double> weights) const {
  return frobenius(moments(weights));
}

std::vector<double> DecorrelationProblem::gradient(std::span<const double> weights) const {
  return gradient_from(moments(weights), weights);
}

DecorrelationProblem::Evaluation DecorrelationProblem::evaluate(
    std::span<const double> weights) const {
  const Moments m = moments(weights);
  return {frobenius(m), gradient_from(m, weights)};
}

std::vector<double> DecorrelationProblem::gradient_from(const Moments& m,
                                                        std::span<const double> weights) const {
  const std::size_t width = f_.cols();
  // d||C||^2/dw_k = 2/(N-1) [2 w_k f_k C g_k^T - 1/N (f_k C s_g^T + s_f C g_k^T)]
  const Dense2D fc = numcore::matmul(f_, m.cov);
  std::vector<double> sf_c(width, 0.0);
  for (std::size_t r = 0; r < width; ++r) {
    if (m.sum_f[r] == 0.0) continue;
    auto crow = m.cov.row(r);
    for (std::size_t c = 0; c < width; ++c) sf_c[c] += m.sum_f[r] * crow[c];
  }
  const double inv_n = 1.0 / static_cast<double>(samples_);
  const double factor = 2.0 / static_cast<double>(samples_ - 1);
  std::vector<double> grad(samples_);
  for (std::size_t k = 0; k < samples_; ++k) {
    auto fck = fc.row(k);
    auto gk = g_.row(k);
    double quad = 0.0, with_sum_g = 0.0, with_sum_f = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      quad += fck[c] * gk[c];
      with_sum_g += fck[c] * m.sum_g[c];
      with_sum_f += sf_c[c] * gk[c];
    }
    grad[k] = factor * (2.0 * weights[k] * quad - inv_n * (with_sum_g + with_sum_f));
  }
  return grad;
}

double decorrelation_objective(const Dense2D& z, std::span<const double> weights,
                               const FeatureMaps& maps, std::span<const DimPair> pairs) {
  detail::note_invocation();
  check_weights(z, weights);
  const DecorrelationProblem problem(z, maps, {pairs.begin(), pairs.end()});
  return problem.value(weights);
}

std::vector<double> objective_grad_weights(const Dense2D& z, std::span<const double> weights,
                                           const FeatureMaps& maps,
                                           std::span<const DimPair> pairs, double l2_lambda) {
  detail::note_invocation();
  check_weights(z, weights);
  const DecorrelationProblem problem(z, maps, {pairs.begin(), pairs.end()});
  std::vector<double> grad = problem.gradient(weights);
  for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += 2.0 * l2_lambda * weights[k];
  return grad;
}

std::vector<DimPair> sample_pairs(std::size_t d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("sample_pairs: fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> dims(d);
  std::iota(dims.begin(), dims.end(), std::size_t{0});
  if (fraction < 1.0) {
    // Guard against representation error, e.g. 0.2 * 10 landing just above 2.
    const auto keep =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d) - 1e-9));
    Rng rng(seed);
    rng.shuffle(dims.begin(), dims.end());
    dims.resize(std::min(keep, d));
    std::sort(dims.begin(), dims.end());
  }
  if (dims.size() < 2) {
    throw DomainError("sample_pairs: " + std::to_string(dims.size()) +
                      " dimension(s) selected, need at least 2");
  }
  std::vector<DimPair> pairs;
  pairs.reserve(dims.size() * (dims.size() - 1) / 2);
  for (std::size_t a = 0; a < dims.size(); ++a)
    for (std::size_t b = a + 1; b < dims.size(); ++b) pairs.emplace_back(dims[a], dims[b]);
  return pairs;
}

}  // namespace oodgnn::decorrelation
