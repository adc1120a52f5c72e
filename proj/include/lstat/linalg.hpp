#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lstat/errors.hpp"

namespace lstat {

// Row-major dense matrix; small sizes only (n <= a few hundred).
template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw ValidationError("matrix product shape mismatch");
    DenseMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        if (aik == T(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw ValidationError("matrix sum shape mismatch");
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }

  T trace() const {
    T s(0);
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {
using std::abs;
template <class T>
auto magnitude(const T& x) {
  return abs(x);
}
}  // namespace detail

// Determinant by LU factorization with partial pivoting. Throws
// NumericalError (carrying the pivot magnitude) when a pivot falls below
// rel_tol * max|a_ij|.
template <class T, class Real = decltype(detail::magnitude(std::declval<T>()))>
T lu_determinant(DenseMatrix<T> a, Real rel_tol = Real(64) * std::numeric_limits<Real>::epsilon()) {
  using detail::magnitude;
  const std::size_t n = a.rows();
  if (n != a.cols()) throw ValidationError("determinant of a non-square matrix");
  if (n == 0) return T(1);

  Real scale(0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Real v = magnitude(a(i, j));
      if (v > scale) scale = v;
    }
  if (scale == Real(0)) throw NumericalError("determinant of the zero matrix", 0.0);

  T det(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    Real best = magnitude(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      Real v = magnitude(a(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= rel_tol * scale)
      throw NumericalError("matrix singular to working precision at column " + std::to_string(col),
                           static_cast<double>(best / scale));
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      det = -det;
    }
    const T p = a(col, col);
    det *= p;
    for (std::size_t r = col + 1; r < n; ++r) {
      const T factor = a(r, col) / p;
      if (factor == T(0)) continue;
      for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= factor * a(col, j);
    }
  }
  return det;
}

}  // namespace lstat
