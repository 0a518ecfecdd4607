#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wdro/errors.hpp"
#include "wdro/linalg.hpp"

namespace wdro {

/// P[Y ≤ 0] for Y ~ N(mean, cov) in low dimension, by nested adaptive Gauss–Kronrod quadrature
/// over the Cholesky factors. Components with zero variance become deterministic checks.
inline double gaussian_orthant_probability(const Vector& mean, const Matrix& cov, double tol = 1e-10) {
  const std::size_t n = mean.size();
  if (cov.rows() != n || cov.cols() != n) fail(ErrorKind::DimensionMismatch, "covariance shape differs from mean");
  // Pivot-free Cholesky with zero pivots left as zero columns.
  Matrix l(n, n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(cov(i, i)));
  const double zero = 1e-13 * std::max(1.0, scale);
  for (std::size_t j = 0; j < n; ++j) {
    double d = cov(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= zero) continue;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = cov(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  const boost::math::normal_distribution<double> phi;
  const double inf = std::numeric_limits<double>::infinity();
  Vector z(n, 0.0);
  // Y_j = mean_j + Σ_{k≤j} l(j,k) z_k ≤ 0 with z standard normal.
  std::function<double(std::size_t)> level = [&](std::size_t j) -> double {
    if (j == n) return 1.0;
    double shift = mean[j];
    for (std::size_t k = 0; k < j; ++k) shift += l(j, k) * z[k];
    if (l(j, j) == 0.0) {
      z[j] = 0.0;
      return shift <= 0.0 ? level(j + 1) : 0.0;
    }
    const double upper = -shift / l(j, j);
    if (j + 1 == n) return boost::math::cdf(phi, upper);
    auto f = [&](double t) {
      z[j] = t;
      return boost::math::pdf(phi, t) * level(j + 1);
    };
    if (upper < -40.0) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -inf, upper, 15, tol);
  };
  return std::clamp(level(0), 0.0, 1.0);
}

}  // namespace wdro
