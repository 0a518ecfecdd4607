#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "wdro/errors.hpp"

namespace wdro {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<Vector>& rows, std::size_t cols_if_empty = 0) {
    if (rows.empty()) return Matrix(0, cols_if_empty);
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) fail(ErrorKind::DimensionMismatch, "ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<Vector> r;
    for (const auto& row : rows) r.emplace_back(row);
    return from_rows(r);
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_) fail(ErrorKind::DimensionMismatch, "row length differs from column count");
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// y = M x
inline Vector multiply(const Matrix& m, std::span<const double> x) {
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = dot(m.row(i), x);
  return y;
}

/// y = Mᵀ x
inline Vector multiply_transposed(const Matrix& m, std::span<const double> x) {
  Vector y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Solves the square system A x = b by Gaussian elimination with partial pivoting.
/// Returns nullopt when a pivot falls below `pivot_tol` (singular to working precision).
inline std::optional<Vector> solve_dense(Matrix a, Vector b, double pivot_tol = 1e-12) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) fail(ErrorKind::DimensionMismatch, "solve_dense needs a square system");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) <= pivot_tol) return std::nullopt;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

/// Row-reduces [A | b] and returns the independent rows; nullopt if the system is inconsistent.
struct ReducedSystem {
  Matrix a;
  Vector b;
};

inline std::optional<ReducedSystem> independent_rows(const Matrix& a, const Vector& b, double tol = 1e-10) {
  const std::size_t m = a.rows(), n = a.cols();
  Matrix w(m, n + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) w(i, j) = a(i, j);
    w(i, n) = b[i];
  }
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t p = r;
    for (std::size_t i = r + 1; i < m; ++i)
      if (std::abs(w(i, c)) > std::abs(w(p, c))) p = i;
    if (std::abs(w(p, c)) <= tol) continue;
    if (p != r) {
      for (std::size_t j = 0; j <= n; ++j) std::swap(w(r, j), w(p, j));
      std::swap(order[r], order[p]);
    }
    for (std::size_t i = r + 1; i < m; ++i) {
      const double f = w(i, c) / w(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j <= n; ++j) w(i, j) -= f * w(r, j);
    }
    ++r;
  }
  for (std::size_t i = r; i < m; ++i)
    if (std::abs(w(i, n)) > tol * std::max(1.0, max_abs(b))) return std::nullopt;
  ReducedSystem out{Matrix(r, n), Vector(r)};
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.a(i, j) = w(i, j);
    out.b[i] = w(i, n);
  }
  return out;
}

}  // namespace wdro
