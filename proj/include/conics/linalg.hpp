#pragma once

// Dense linear algebra over any of the scalar domains in fields.hpp.
// Exact domains use fraction-free (Bareiss) elimination and exact zero
// tests; double / complex use partial pivoting.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "conics/fields.hpp"

namespace conics {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_, data_.empty() ? T{} : data_.front());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  /// Copy with one row and one column deleted.
  Matrix minor_matrix(std::size_t skip_row, std::size_t skip_col) const {
    Matrix m(rows_ - 1, cols_ - 1, (*this)(0, 0));
    for (std::size_t r = 0, rr = 0; r < rows_; ++r) {
      if (r == skip_row) continue;
      for (std::size_t c = 0, cc = 0; c < cols_; ++c) {
        if (c == skip_col) continue;
        m(rr, cc++) = (*this)(r, c);
      }
      ++rr;
    }
    return m;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

template <class T>
T determinant(Matrix<T> m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw std::invalid_argument("determinant of a non-square matrix");
  if (n == 0) throw std::invalid_argument("determinant of an empty matrix");
  const T zero = zero_like(m(0, 0));
  const T one = one_like(m(0, 0));
  if constexpr (is_exact_v<T>) {
    // Bareiss: after step k every entry is a (k+1)x(k+1) minor, so divisions are exact.
    T prev = one;
    bool negate = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (is_zero(m(k, k))) {
        std::size_t r = k + 1;
        while (r < n && is_zero(m(r, k))) ++r;
        if (r == n) return zero;
        m.swap_rows(k, r);
        negate = !negate;
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        for (std::size_t j = k + 1; j < n; ++j) {
          T v = m(i, j) * m(k, k) - m(i, k) * m(k, j);
          m(i, j) = v / prev;
        }
      }
      prev = m(k, k);
    }
    T det = m(n - 1, n - 1);
    return negate ? T(-det) : det;
  } else {
    T det = one;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = magnitude(m(k, k));
      for (std::size_t r = k + 1; r < n; ++r) {
        double v = magnitude(m(r, k));
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best == 0.0) return zero;
      if (piv != k) {
        m.swap_rows(k, piv);
        det = -det;
      }
      det *= m(k, k);
      for (std::size_t r = k + 1; r < n; ++r) {
        T f = m(r, k) / m(k, k);
        for (std::size_t c = k + 1; c < n; ++c) m(r, c) -= f * m(k, c);
      }
    }
    return det;
  }
}

/// Basis of the right null space {x : m x = 0} by reduced row echelon form.
/// For floating point types entries below `tol` (relative to the largest
/// entry) are treated as zero.
template <class T>
std::vector<std::vector<T>> kernel(Matrix<T> m, double tol = 1e-12) {
  const std::size_t rows = m.rows(), cols = m.cols();
  const T zero = zero_like(m(0, 0));
  const T one = one_like(m(0, 0));
  double scale = 0.0;
  if constexpr (!is_exact_v<T>) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) scale = std::max(scale, magnitude(m(r, c)));
  }
  auto negligible = [&](const T& x) {
    if constexpr (is_exact_v<T>) {
      return is_zero(x);
    } else {
      return magnitude(x) <= tol * scale;
    }
  };

  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < rows; ++c) {
    std::size_t piv = rows;
    if constexpr (is_exact_v<T>) {
      for (std::size_t r = row; r < rows; ++r)
        if (!negligible(m(r, c))) {
          piv = r;
          break;
        }
    } else {
      double best = 0.0;
      for (std::size_t r = row; r < rows; ++r)
        if (!negligible(m(r, c)) && magnitude(m(r, c)) > best) {
          best = magnitude(m(r, c));
          piv = r;
        }
    }
    if (piv == rows) continue;
    m.swap_rows(row, piv);
    T inv = one / m(row, c);
    for (std::size_t k = c; k < cols; ++k) m(row, k) *= inv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row || is_zero(m(r, c))) continue;
      T f = m(r, c);
      for (std::size_t k = c; k < cols; ++k) m(r, k) -= f * m(row, k);
    }
    pivot_cols.push_back(c);
    ++row;
  }

  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivot_cols) is_pivot[c] = true;
  std::vector<std::vector<T>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<T> v(cols, zero);
    v[free] = one;
    for (std::size_t k = 0; k < pivot_cols.size(); ++k) v[pivot_cols[k]] = -m(k, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Solves the square system m x = rhs; returns nullopt when m is singular.
template <class T>
std::optional<std::vector<T>> solve_linear(const Matrix<T>& m, const std::vector<T>& rhs) {
  const std::size_t n = m.rows();
  Matrix<T> aug(n, n + 1, m(0, 0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug(r, c) = m(r, c);
    aug(r, n) = -rhs[r];
  }
  auto ker = kernel(aug);
  // The solution is the unique kernel vector with last coordinate 1.
  if (ker.size() != 1 || is_zero(ker[0][n])) return std::nullopt;
  std::vector<T> x(n, ker[0][0]);
  T last = ker[0][n];
  for (std::size_t r = 0; r < n; ++r) x[r] = ker[0][r] / last;
  return x;
}

}  // namespace conics
