#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gmvo {

/// Dense row-major matrix of doubles. All encoder/optimizer arithmetic runs
/// in 64-bit; 32-bit storage only appears at the file-format boundary.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a (r×k) times b (k×c). Throws ValidationError on shape mismatch,
/// naming both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);

/// aᵀ b with a (k×r), b (k×c).
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);

/// a bᵀ with a (r×k), b (c×k).
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);

/// Elementwise ReLU, with the subgradient convention relu'(0) = 0 applied
/// by callers that differentiate through it.
Matrix relu(const Matrix& m);

}  // namespace gmvo
