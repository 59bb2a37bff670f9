#include "oodgnn/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "oodgnn/errors.hpp"

namespace oodgnn::numcore {

Dense2D numeric_gradient(const std::function<double(const Dense2D&)>& f, const Dense2D& x,
                         double step) {
  if (!(step > 0.0)) throw DomainError("numeric_gradient: step must be positive");
  Dense2D grad(x.rows(), x.cols());
  Dense2D probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double original = probe.values()[i];
    probe.values()[i] = original + step;
    const double up = f(probe);
    probe.values()[i] = original - step;
    const double down = f(probe);
    probe.values()[i] = original;
    grad.values()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double max_relative_error(const Dense2D& analytic, const Dense2D& numeric) {
  if (!analytic.same_shape(numeric)) {
    throw DimensionError("max_relative_error: shape " + analytic.shape_string() + " vs " +
                         numeric.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic.values()[i];
    const double n = numeric.values()[i];
    const double denom = std::max({std::abs(a), std::abs(n), 1e-8});
    worst = std::max(worst, std::abs(a - n) / denom);
  }
  return worst;
}

double grad_check(const ScalarFunction& f, const Dense2D& x, double step) {
  if (!(step > 0.0)) throw DomainError("grad_check: step must be positive");
  Tape tape;
  Var input = tape.leaf(x);
  Var root = f(tape, input);
  tape.backward(root);
  const Dense2D analytic = tape.grad(input);

  const Dense2D numeric = numeric_gradient(
      [&f](const Dense2D& probe) {
        Tape t;
        return f(t, t.leaf(probe)).value().item();
      },
      x, step);
  return max_relative_error(analytic, numeric);
}

}  // namespace oodgnn::numcore
