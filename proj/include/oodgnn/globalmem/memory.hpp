#pragma once

#include <span>
#include <utility>
#include <vector>

#include "oodgnn/numcore/dense.hpp"

namespace oodgnn::globalmem {

using numcore::Dense2D;

// K groups of stored representations and weights, each group the size of one
// mini-batch, refreshed by momentum updates from the latest local batch.
class GlobalMemory {
 public:
  GlobalMemory() = default;
  // Representations start at zero, weights at one. Throws DomainError if a
  // gamma lies outside [0, 1) or the counts do not match.
  GlobalMemory(std::size_t k, std::size_t batch_size, std::size_t d, std::vector<double> gammas);

  std::size_t k_groups() const { return z_groups_.size(); }
  std::size_t batch_size() const { return batch_size_; }
  std::size_t dim() const { return d_; }
  const std::vector<double>& gammas() const { return gammas_; }
  const Dense2D& z_group(std::size_t k) const { return z_groups_.at(k); }
  const std::vector<double>& w_group(std::size_t k) const { return w_groups_.at(k); }
  // All stored weights in group order; the frozen prefix of a concatenation.
  std::vector<double> stored_weights() const;

  struct Concatenated {
    Dense2D z;               // ((K+1)|B|) x d: g_1, ..., g_K, local
    std::vector<double> w;   // (K+1)|B|
  };
  Concatenated concat(const Dense2D& z_local, std::span<const double> w_local) const;

  // Z_k <- gamma_k Z_k + (1 - gamma_k) Z_local, W_k likewise.
  void momentum_update(const Dense2D& z_local, std::span<const double> w_local);

  // Direct state restore, used when loading a checkpoint.
  void set_group(std::size_t k, Dense2D z, std::vector<double> w);

 private:
  void check_local(const Dense2D& z_local, std::span<const double> w_local, const char* op) const;

  std::size_t batch_size_ = 0;
  std::size_t d_ = 0;
  std::vector<Dense2D> z_groups_;
  std::vector<std::vector<double>> w_groups_;
  std::vector<double> gammas_;
};

inline constexpr double kDefaultGamma = 0.9;

GlobalMemory init_memory(std::size_t k, std::size_t batch_size, std::size_t d,
                         std::vector<double> gammas);

}  // namespace oodgnn::globalmem
