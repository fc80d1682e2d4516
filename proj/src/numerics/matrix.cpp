#include "openden/numerics/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "openden/error.hpp"

namespace openden::numerics {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Matrix::append_rows(std::size_t count, double fill) {
  data_.resize(data_.size() + count * cols_, fill);
  rows_ += count;
}

void Matrix::append_cols(std::size_t count, double fill) {
  if (count == 0) return;
  const std::size_t new_cols = cols_ + count;
  std::vector<double> next(rows_ * new_cols, fill);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_), cols_,
                next.begin() + static_cast<std::ptrdiff_t>(r * new_cols));
  }
  data_ = std::move(next);
  cols_ = new_cols;
}

void Matrix::erase_row(std::size_t r) {
  if (r >= rows_) throw IndexError("Matrix::erase_row: row " + std::to_string(r) + " out of range");
  auto first = data_.begin() + static_cast<std::ptrdiff_t>(r * cols_);
  data_.erase(first, first + static_cast<std::ptrdiff_t>(cols_));
  --rows_;
}

void Matrix::erase_col(std::size_t c) {
  if (c >= cols_) throw IndexError("Matrix::erase_col: col " + std::to_string(c) + " out of range");
  std::size_t out = 0;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j != c) data_[out++] = data_[r * cols_ + j];
    }
  }
  --cols_;
  data_.resize(rows_ * cols_);
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_transposed: inner dimensions differ");
  Matrix out(a.rows(), b.rows());
  const std::size_t n = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix transposed_matmul(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("transposed_matmul: row counts differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      auto dst = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aki * brow[j];
    }
  }
  return out;
}

bool bit_identical(std::span<const double> a, std::span<const double> b) noexcept {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace openden::numerics
