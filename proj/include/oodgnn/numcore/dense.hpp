#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace oodgnn::numcore {

// Row-major real matrix. Holds node features, parameters, representations and
// covariance blocks alike.
class Dense2D {
 public:
  Dense2D() = default;
  Dense2D(std::size_t rows, std::size_t cols, double fill = 0.0);
  Dense2D(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Dense2D from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Dense2D identity(std::size_t n);
  static Dense2D scalar(double value) { return Dense2D(1, 1, value); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  bool same_shape(const Dense2D& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  // Value of a 1x1 matrix.
  double item() const;

  void fill(double value);
  std::string shape_string() const;

  bool operator==(const Dense2D& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Dense2D matmul(const Dense2D& a, const Dense2D& b);
// a^T * b without materializing the transpose.
Dense2D matmul_tn(const Dense2D& a, const Dense2D& b);
// a * b^T.
Dense2D matmul_nt(const Dense2D& a, const Dense2D& b);
Dense2D transpose(const Dense2D& a);

// out += a, shapes must match.
void add_inplace(Dense2D& out, const Dense2D& a);

bool all_finite(const Dense2D& a);
double max_abs_diff(const Dense2D& a, const Dense2D& b);

// Extracts column c as a contiguous vector.
std::vector<double> column(const Dense2D& a, std::size_t c);

// Vertical stack; all blocks must share a column count.
Dense2D stack_rows(std::span<const Dense2D> blocks);

}  // namespace oodgnn::numcore
