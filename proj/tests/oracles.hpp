#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

struct Row {
  Vec a;
  int rel;  // -1: a·x <= b, 0: a·x = b, +1: a·x >= b
  double b;
};

inline std::optional<Vec> gauss(std::vector<Vec> a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    if (std::fabs(a[p][k]) < 1e-11) return std::nullopt;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

inline bool satisfies(const Row& r, const Vec& x, double tol) {
  double s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) s += r.a[j] * x[j];
  if (r.rel < 0) return s <= r.b + tol;
  if (r.rel > 0) return s >= r.b - tol;
  return std::fabs(s - r.b) <= tol;
}

/// Calls `visit` on every basic feasible solution of {rows} in dimension n.
inline void for_each_vertex(const std::vector<Row>& rows, std::size_t n, const std::function<void(const Vec&)>& visit,
                            double tol = 1e-9) {
  std::vector<std::size_t> eq, ineq;
  for (std::size_t i = 0; i < rows.size(); ++i) (rows[i].rel == 0 ? eq : ineq).push_back(i);
  if (eq.size() > n) return;
  const std::size_t need = n - eq.size();
  if (need > ineq.size()) return;
  std::vector<std::size_t> pick(need);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == need) {
      std::vector<Vec> a;
      Vec b;
      for (std::size_t i : eq) a.push_back(rows[i].a), b.push_back(rows[i].b);
      for (std::size_t i : pick) a.push_back(rows[ineq[i]].a), b.push_back(rows[ineq[i]].b);
      auto x = gauss(a, b);
      if (!x) return;
      for (const auto& r : rows)
        if (!satisfies(r, *x, tol)) return;
      visit(*x);
      return;
    }
    for (std::size_t i = start; i < ineq.size(); ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

/// Minimum of c·x over the vertices; nullopt if none exists.
inline std::optional<double> vertex_minimum(const std::vector<Row>& rows, const Vec& c) {
  std::optional<double> best;
  for_each_vertex(rows, c.size(), [&](const Vec& x) {
    double v = 0;
    for (std::size_t j = 0; j < c.size(); ++j) v += c[j] * x[j];
    if (!best || v < *best) best = v;
  });
  return best;
}

/// Standard normal cdf.
inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Worst-case expectation over distributions supported on `grid` within transport budget eps of the
/// empirical distribution on `samples` (which must lie on the grid), in one dimension.
/// Solved through its Lagrangian dual min_{λ ≥ 0} λε + (1/N) Σ_i max_j [ℓ(g_j) − λ|ξ̂_i − g_j|]
/// by golden-section search, independent of any simplex code.
inline double grid_dro_1d(const Vec& samples, const Vec& grid, const std::function<double(double)>& loss, double eps,
                          double lambda_max = 1e4) {
  Vec lv(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) lv[j] = loss(grid[j]);
  const double n = static_cast<double>(samples.size());
  auto f = [&](double lam) {
    double total = lam * eps;
    for (double x : samples) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < grid.size(); ++j) best = std::max(best, lv[j] - lam * std::fabs(x - grid[j]));
      total += best / n;
    }
    return total;
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = lambda_max;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::min({f(a), f(b), fc, fd, f(0.0)});
}

/// Points lo, lo + h, ..., hi with h = 1/steps_per_unit, built from integers to keep them exact.
inline Vec uniform_grid(int lo_units, int hi_units, int steps_per_unit) {
  Vec g;
  for (int j = lo_units * steps_per_unit; j <= hi_units * steps_per_unit; ++j)
    g.push_back(static_cast<double>(j) / steps_per_unit);
  return g;
}

}  // namespace oracle
