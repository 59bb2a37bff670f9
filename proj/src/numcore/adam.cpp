#include "oodgnn/numcore/adam.hpp"

#include <cmath>

#include "oodgnn/errors.hpp"

namespace oodgnn::numcore {

void Adam::step(std::span<Dense2D* const> params, std::span<const Dense2D* const> grads) {
  if (params.size() != grads.size()) {
    throw DimensionError("Adam::step: " + std::to_string(params.size()) + " params but " +
                         std::to_string(grads.size()) + " gradients");
  }
  if (m_.empty()) {
    for (const Dense2D* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  if (m_.size() != params.size()) throw ContractError("Adam::step: parameter list changed size");

  ++t_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Dense2D& p = *params[k];
    const Dense2D& g = *grads[k];
    if (!p.same_shape(g) || !p.same_shape(m_[k])) {
      throw DimensionError("Adam::step: parameter " + p.shape_string() + " vs gradient " +
                           g.shape_string());
    }
    auto pv = p.values();
    auto gv = g.values();
    auto mv = m_[k].values();
    auto vv = v_[k].values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = config_.beta1 * mv[i] + (1.0 - config_.beta1) * gv[i];
      vv[i] = config_.beta2 * vv[i] + (1.0 - config_.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / correction1;
      const double v_hat = vv[i] / correction2;
      pv[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

}  // namespace oodgnn::numcore
