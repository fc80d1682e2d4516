#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace openden::numerics {

// Dense row-major real64 matrix. Rows can be appended or erased in place so
// that growable layers keep one contiguous buffer.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double value);

  void append_rows(std::size_t count, double fill = 0.0);
  void append_cols(std::size_t count, double fill = 0.0);
  void erase_row(std::size_t r);
  void erase_col(std::size_t c);

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// out = a * b^T; the usual batch forward product X W^T.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
// out = a^T * b; weight gradients dZ^T A.
Matrix transposed_matmul(const Matrix& a, const Matrix& b);

// Bitwise equality, so +0.0 and -0.0 differ and NaN payloads compare.
bool bit_identical(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace openden::numerics
