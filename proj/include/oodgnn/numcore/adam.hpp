#pragma once

#include <span>
#include <vector>

#include "oodgnn/numcore/dense.hpp"

namespace oodgnn::numcore {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive moment estimation with bias correction. Moment buffers are matched
// to parameters by position, so callers must pass parameters in a stable order.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Dense2D* const> params, std::span<const Dense2D* const> grads);

  const AdamConfig& config() const { return config_; }
  long steps_taken() const { return t_; }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::vector<Dense2D> m_;
  std::vector<Dense2D> v_;
};

}  // namespace oodgnn::numcore
