#include "oodgnn/numcore/dense.hpp"

#include <algorithm>
#include <cmath>

#include "oodgnn/errors.hpp"

namespace oodgnn::numcore {

namespace {

void require_shape(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw DimensionError("Dense2D: shape must be positive, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

std::string shape_of(std::size_t r, std::size_t c) {
  return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
}

}  // namespace

Dense2D::Dense2D(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  require_shape(rows, cols);
}

Dense2D::Dense2D(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require_shape(rows, cols);
  if (values_.size() != rows * cols) {
    throw DimensionError("Dense2D: " + std::to_string(values_.size()) +
                         " values do not fill shape " + shape_of(rows, cols));
  }
}

Dense2D Dense2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Dense2D::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Dense2D(r, c, std::move(values));
}

Dense2D Dense2D::identity(std::size_t n) {
  Dense2D out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

double Dense2D::item() const {
  if (rows_ != 1 || cols_ != 1) {
    throw DimensionError("Dense2D::item: expected [1x1], got " + shape_string());
  }
  return values_[0];
}

void Dense2D::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

std::string Dense2D::shape_string() const { return shape_of(rows_, cols_); }

Dense2D matmul(const Dense2D& a, const Dense2D& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + a.shape_string() + " by " +
                         b.shape_string());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Dense2D out(n, m);
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      if (av == 0.0) continue;
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Dense2D matmul_tn(const Dense2D& a, const Dense2D& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: cannot multiply transpose of " + a.shape_string() + " by " +
                         b.shape_string());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Dense2D out(k, m);
  double* po = out.data();
  for (std::size_t r = 0; r < n; ++r) {
    const double* arow = a.data() + r * k;
    const double* brow = b.data() + r * m;
    for (std::size_t i = 0; i < k; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Dense2D matmul_nt(const Dense2D& a, const Dense2D& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: cannot multiply " + a.shape_string() +
                         " by transpose of " + b.shape_string());
  }
  // The right operand is usually a small weight matrix; transposing it lets
  // the row-streaming kernel do the work.
  return matmul(a, transpose(b));
}

Dense2D transpose(const Dense2D& a) {
  Dense2D out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

void add_inplace(Dense2D& out, const Dense2D& a) {
  if (!out.same_shape(a)) {
    throw DimensionError("add: shape " + out.shape_string() + " vs " + a.shape_string());
  }
  auto dst = out.values();
  auto src = a.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

bool all_finite(const Dense2D& a) {
  return std::all_of(a.values().begin(), a.values().end(),
                     [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Dense2D& a, const Dense2D& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff: shape " + a.shape_string() + " vs " + b.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

std::vector<double> column(const Dense2D& a, std::size_t c) {
  if (c >= a.cols()) throw IndexError("column: index " + std::to_string(c) + " out of range");
  std::vector<double> out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = a(r, c);
  return out;
}

Dense2D stack_rows(std::span<const Dense2D> blocks) {
  if (blocks.empty()) throw DimensionError("stack_rows: no blocks");
  const std::size_t cols = blocks.front().cols();
  std::size_t rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) {
      throw DimensionError("stack_rows: column mismatch " + blocks.front().shape_string() +
                           " vs " + b.shape_string());
    }
    rows += b.rows();
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& b : blocks) values.insert(values.end(), b.values().begin(), b.values().end());
  return Dense2D(rows, cols, std::move(values));
}

}  // namespace oodgnn::numcore
