#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oodgnn/numcore/dense.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::decorrelation {

using numcore::Dense2D;

// Q random Fourier functions x -> sqrt(2) cos(freq_q x + phase_q) with
// freq ~ N(0, 1) and phase ~ U[0, 2 pi).
struct RFFBank {
  std::vector<double> freqs;
  std::vector<double> phases;

  std::size_t q() const { return freqs.size(); }

  static RFFBank sample(std::size_t q, Rng& rng);
  // Throws DomainError unless sizes match, q >= 1 and phases lie in [0, 2 pi).
  void validate() const;
};

std::vector<double> rff_apply(double x, const RFFBank& bank);

// N x Q matrix whose row n is rff_apply(values[n], bank).
Dense2D rff_map(std::span<const double> values, const RFFBank& bank);

enum class FeatureMapKind {
  random_fourier,
  identity,  // f(x) = g(x) = x; removes the nonlinearity (linear decorrelation)
};

// Per-dimension f and g function sets applied to the columns of Z.
class FeatureMaps {
 public:
  static FeatureMaps sample(std::size_t dims, std::size_t q, Rng& rng);
  static FeatureMaps identity(std::size_t dims);

  FeatureMapKind kind() const { return kind_; }
  std::size_t dims() const { return dims_; }
  std::size_t q() const { return kind_ == FeatureMapKind::identity ? 1 : q_; }

  const RFFBank& f_bank(std::size_t dim) const { return f_.at(dim); }
  const RFFBank& g_bank(std::size_t dim) const { return g_.at(dim); }

  Dense2D map_f(std::size_t dim, std::span<const double> column) const;
  Dense2D map_g(std::size_t dim, std::span<const double> column) const;

 private:
  FeatureMapKind kind_ = FeatureMapKind::random_fourier;
  std::size_t dims_ = 0;
  std::size_t q_ = 0;
  std::vector<RFFBank> f_;
  std::vector<RFFBank> g_;
};

}  // namespace oodgnn::decorrelation
