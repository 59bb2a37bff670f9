#pragma once

#include <functional>

#include "oodgnn/numcore/tape.hpp"

namespace oodgnn::numcore {

// Builds a scalar (1x1) node from a differentiable input on the given tape.
using ScalarFunction = std::function<Var(Tape&, Var)>;

// Compares the backward-pass gradient of f at x against central differences.
// Returns the elementwise maximum of |analytic - numeric| divided by
// max(|analytic|, |numeric|, 1e-8).
double grad_check(const ScalarFunction& f, const Dense2D& x, double step);

// Central-difference gradient of an arbitrary scalar function of x.
Dense2D numeric_gradient(const std::function<double(const Dense2D&)>& f, const Dense2D& x,
                         double step);

// Max relative error between two gradients using the grad_check denominator.
double max_relative_error(const Dense2D& analytic, const Dense2D& numeric);

}  // namespace oodgnn::numcore
