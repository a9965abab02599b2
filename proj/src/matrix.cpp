#include "gmvo/matrix.hpp"

#include <cmath>
#include <string>

#include "gmvo/errors.hpp"

namespace gmvo {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_inner(const Matrix& a, const Matrix& b, std::size_t a_inner,
                   std::size_t b_inner, const char* op) {
  if (a_inner != b_inner) {
    throw ValidationError(std::string(op) + ": shape mismatch " + shape_of(a) +
                          " vs " + shape_of(b));
  }
}

}  // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m.cols()) {
      throw ValidationError("from_rows: ragged initializer");
    }
    std::size_t c = 0;
    for (double v : row) m.at(r, c++) = v;
    ++r;
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_inner(a, b, a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
  require_inner(a, b, a.rows(), b.rows(), "matmul_transpose_a");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto arow = a.row(k);
    const auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
  require_inner(a, b, a.cols(), b.cols(), "matmul_transpose_b");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    auto orow = out.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      orow[j] = dot(arow, b.row(j));
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("dot: length mismatch " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.values()) {
    if (v < 0.0) v = 0.0;
  }
  return out;
}

}  // namespace gmvo
