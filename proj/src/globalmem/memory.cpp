#include "oodgnn/globalmem/memory.hpp"

#include "oodgnn/errors.hpp"

namespace oodgnn::globalmem {

GlobalMemory::GlobalMemory(std::size_t k, std::size_t batch_size, std::size_t d,
                           std::vector<double> gammas)
    : batch_size_(batch_size), d_(d), gammas_(std::move(gammas)) {
  if (batch_size == 0 || d == 0) throw DomainError("GlobalMemory: batch_size and d must be >= 1");
  if (gammas_.size() != k) {
    throw DomainError("GlobalMemory: " + std::to_string(gammas_.size()) + " gammas for " +
                      std::to_string(k) + " groups");
  }
  for (double g : gammas_) {
    if (!(g >= 0.0 && g < 1.0)) {
      throw DomainError("GlobalMemory: gamma " + std::to_string(g) + " outside [0, 1)");
    }
  }
  z_groups_.assign(k, Dense2D(batch_size, d, 0.0));
  w_groups_.assign(k, std::vector<double>(batch_size, 1.0));
}

GlobalMemory init_memory(std::size_t k, std::size_t batch_size, std::size_t d,
                         std::vector<double> gammas) {
  return GlobalMemory(k, batch_size, d, std::move(gammas));
}

std::vector<double> GlobalMemory::stored_weights() const {
  std::vector<double> out;
  out.reserve(k_groups() * batch_size_);
  for (const auto& w : w_groups_) out.insert(out.end(), w.begin(), w.end());
  return out;
}

void GlobalMemory::check_local(const Dense2D& z_local, std::span<const double> w_local,
                               const char* op) const {
  if (z_local.rows() != batch_size_ || z_local.cols() != d_ || w_local.size() != batch_size_) {
    throw DimensionError(std::string(op) + ": local batch " + z_local.shape_string() + " with " +
                         std::to_string(w_local.size()) + " weights, memory expects [" +
                         std::to_string(batch_size_) + "x" + std::to_string(d_) + "]");
  }
}

GlobalMemory::Concatenated GlobalMemory::concat(const Dense2D& z_local,
                                                std::span<const double> w_local) const {
  if (k_groups() == 0) return {z_local, {w_local.begin(), w_local.end()}};
  check_local(z_local, w_local, "concat");
  std::vector<Dense2D> blocks = z_groups_;
  blocks.push_back(z_local);
  Concatenated out{numcore::stack_rows(blocks), stored_weights()};
  out.w.insert(out.w.end(), w_local.begin(), w_local.end());
  return out;
}

void GlobalMemory::momentum_update(const Dense2D& z_local, std::span<const double> w_local) {
  if (k_groups() == 0) return;
  check_local(z_local, w_local, "momentum_update");
  for (std::size_t k = 0; k < k_groups(); ++k) {
    const double gamma = gammas_[k];
    auto stored = z_groups_[k].values();
    auto fresh = z_local.values();
    for (std::size_t i = 0; i < stored.size(); ++i)
      stored[i] = gamma * stored[i] + (1.0 - gamma) * fresh[i];
    auto& w = w_groups_[k];
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = gamma * w[i] + (1.0 - gamma) * w_local[i];
  }
}

void GlobalMemory::set_group(std::size_t k, Dense2D z, std::vector<double> w) {
  if (k >= k_groups()) throw IndexError("GlobalMemory::set_group: group out of range");
  if (z.rows() != batch_size_ || z.cols() != d_ || w.size() != batch_size_) {
    throw DimensionError("GlobalMemory::set_group: state " + z.shape_string() +
                         " does not match memory configuration");
  }
  z_groups_[k] = std::move(z);
  w_groups_[k] = std::move(w);
}

}  // namespace oodgnn::globalmem
