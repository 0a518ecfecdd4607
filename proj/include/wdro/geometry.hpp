#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp.hpp"

namespace wdro {

/// Ground norm of the transport cost. Only the polyhedral pair is supported.
enum class GroundNorm { One, Inf };

constexpr GroundNorm dual(GroundNorm n) { return n == GroundNorm::One ? GroundNorm::Inf : GroundNorm::One; }

constexpr const char* to_string(GroundNorm n) { return n == GroundNorm::One ? "l1" : "linf"; }

inline double norm_value(std::span<const double> x, GroundNorm n) {
  double r = 0.0;
  for (double v : x) r = n == GroundNorm::One ? r + std::abs(v) : std::max(r, std::abs(v));
  return r;
}

inline double dual_norm_value(std::span<const double> z, GroundNorm n) { return norm_value(z, dual(n)); }

/// {ξ ∈ ℝᵐ : Cξ ≤ d}. No rows means the whole space.
struct Polytope {
  Matrix C;
  Vector d;
  std::size_t m = 0;

  static Polytope whole_space(std::size_t dim) { return {Matrix(0, dim), {}, dim}; }

  static Polytope box(std::size_t dim, double lo, double hi) { return box(Vector(dim, lo), Vector(dim, hi)); }

  static Polytope box(const Vector& lo, const Vector& hi) {
    const std::size_t dim = lo.size();
    Polytope p{Matrix(0, dim), {}, dim};
    for (std::size_t j = 0; j < dim; ++j) {
      Vector r(dim, 0.0);
      r[j] = 1.0;
      p.add_row(r, hi[j]);
      r[j] = -1.0;
      p.add_row(r, -lo[j]);
    }
    return p;
  }

  /// {ξ ≥ 0, Σξ ≤ 1}
  static Polytope simplex(std::size_t dim) {
    Polytope p{Matrix(0, dim), {}, dim};
    for (std::size_t j = 0; j < dim; ++j) {
      Vector r(dim, 0.0);
      r[j] = -1.0;
      p.add_row(r, 0.0);
    }
    p.add_row(Vector(dim, 1.0), 1.0);
    return p;
  }

  void add_row(std::span<const double> row, double rhs) {
    C.append_row(row);
    d.push_back(rhs);
  }

  std::size_t num_rows() const noexcept { return d.size(); }
  bool is_whole_space() const noexcept { return d.empty(); }

  void validate() const {
    if (C.rows() != d.size()) fail(ErrorKind::DimensionMismatch, "polytope C has " + std::to_string(C.rows()) +
                                                                     " rows but d has " + std::to_string(d.size()));
    if (C.rows() > 0 && C.cols() != m)
      fail(ErrorKind::DimensionMismatch, "polytope C has " + std::to_string(C.cols()) + " columns, expected " +
                                             std::to_string(m));
    for (double v : C.data())
      if (!std::isfinite(v)) fail(ErrorKind::InvalidConfig, "non-finite entry in polytope C");
    for (double v : d)
      if (!std::isfinite(v)) fail(ErrorKind::InvalidConfig, "non-finite entry in polytope d");
  }

  /// Largest violation max_r (C_r ξ − d_r), or 0 if inside.
  double violation(std::span<const double> xi) const {
    double v = 0.0;
    for (std::size_t r = 0; r < num_rows(); ++r) v = std::max(v, dot(C.row(r), xi) - d[r]);
    return v;
  }

  bool contains(std::span<const double> xi, double tol = 0.0) const { return violation(xi) <= tol; }

  friend bool operator==(const Polytope&, const Polytope&) = default;
};

/// Block-diagonal product Ξ₁ × … × Ξ_T.
inline Polytope product(const std::vector<Polytope>& parts) {
  std::size_t dim = 0;
  for (const auto& p : parts) dim += p.m;
  Polytope out = Polytope::whole_space(dim);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < p.num_rows(); ++r) {
      Vector row(dim, 0.0);
      for (std::size_t j = 0; j < p.m; ++j) row[offset + j] = p.C(r, j);
      out.add_row(row, p.d[r]);
    }
    offset += p.m;
  }
  return out;
}

/// Feasibility LP for Cξ ≤ d plus optional extra rows; returns a point or nothing.
inline std::optional<Vector> find_point(const Polytope& p, const std::vector<Constraint>& extra = {},
                                        const SolverConfig& cfg = {}) {
  LinearProgram lp;
  for (std::size_t j = 0; j < p.m; ++j) lp.add_variable(0.0, -kInf, kInf);
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    const auto row = p.C.row(r);
    lp.add_constraint(Vector(row.begin(), row.end()), Relation::LessEqual, p.d[r]);
  }
  for (const auto& c : extra) lp.constraints.push_back(c);
  const auto sol = solve_lp(lp, cfg);
  if (sol.status == LpStatus::Infeasible) return std::nullopt;
  return sol.primal;
}

inline bool is_nonempty(const Polytope& p, const SolverConfig& cfg = {}) {
  if (p.is_whole_space()) return true;
  return find_point(p, {}, cfg).has_value();
}

inline void require_nonempty(const Polytope& p, const SolverConfig& cfg = {}) {
  if (!is_nonempty(p, cfg)) fail(ErrorKind::EmptySupport, "support set {ξ : Cξ ≤ d} is empty");
}

/// σ_Ξ(z) = sup{⟨z, ξ⟩ : Cξ ≤ d}, evaluated as min{⟨γ, d⟩ : Cᵀγ = z, γ ≥ 0}; +∞ when unbounded.
inline double support_function(const Polytope& p, std::span<const double> z, const SolverConfig& cfg = {}) {
  p.validate();
  if (z.size() != p.m) fail(ErrorKind::DimensionMismatch, "support_function: z has wrong dimension");
  require_nonempty(p, cfg);
  if (p.is_whole_space()) return max_abs(z) == 0.0 ? 0.0 : kInf;
  LinearProgram lp;
  for (std::size_t r = 0; r < p.num_rows(); ++r) lp.add_variable(p.d[r]);
  for (std::size_t j = 0; j < p.m; ++j) {
    Vector col(p.num_rows());
    for (std::size_t r = 0; r < p.num_rows(); ++r) col[r] = p.C(r, j);
    lp.add_constraint(std::move(col), Relation::Equal, z[j]);
  }
  const auto sol = solve_lp(lp, cfg);
  if (sol.status == LpStatus::Infeasible) return kInf;
  if (sol.status == LpStatus::Unbounded) fail(ErrorKind::EmptySupport, "support set is empty (dual unbounded)");
  return *sol.objective_value;
}

/// Nearest point of Ξ to `x` in the ground norm.
inline Vector project(const Polytope& p, std::span<const double> x, GroundNorm n, const SolverConfig& cfg = {}) {
  if (p.contains(x)) return Vector(x.begin(), x.end());
  const std::size_t m = p.m;
  LinearProgram lp;
  for (std::size_t j = 0; j < m; ++j) lp.add_variable(0.0, -kInf, kInf);
  const std::size_t t0 = lp.num_variables();
  if (n == GroundNorm::One) {
    for (std::size_t j = 0; j < m; ++j) lp.add_variable(1.0);
  } else {
    lp.add_variable(1.0);
  }
  const std::size_t nv = lp.num_variables();
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t t = n == GroundNorm::One ? t0 + j : t0;
    for (double s : {1.0, -1.0}) {
      Vector row(nv, 0.0);
      row[j] = s;
      row[t] = -1.0;
      lp.add_constraint(std::move(row), Relation::LessEqual, s * x[j]);
    }
  }
  for (std::size_t r = 0; r < p.num_rows(); ++r) {
    Vector row(nv, 0.0);
    for (std::size_t j = 0; j < m; ++j) row[j] = p.C(r, j);
    lp.add_constraint(std::move(row), Relation::LessEqual, p.d[r]);
  }
  SolverConfig tight = cfg;
  tight.feas_tol = std::min(cfg.feas_tol, 1e-14);
  const auto sol = solve_lp(lp, tight);
  if (!sol.optimal()) fail(ErrorKind::EmptySupport, "cannot project onto an empty support set");
  return Vector(sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(m));
}

struct VertexConfig {
  double dedup_tol = 1e-9;
  double feas_tol = 1e-9;
  std::size_t max_combinations = 2'000'000;
};

namespace detail {
inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}
}  // namespace detail

/// Extreme points of {θ ≥ 0 : Eθ = q} by enumerating basic feasible solutions.
/// Throws UnboundedPolyhedron if a recession direction exists; returns an empty list for an empty set.
inline std::vector<Vector> enumerate_vertices(const Matrix& e, const Vector& q, const VertexConfig& vc = {},
                                              const SolverConfig& cfg = {}) {
  const std::size_t n = e.cols();
  if (e.rows() != q.size()) fail(ErrorKind::DimensionMismatch, "enumerate_vertices: E and q disagree");

  // Feasibility and boundedness: max Σd s.t. Ed = 0, d ≥ 0, Σd ≤ 1 is positive iff a ray exists.
  {
    LinearProgram feas;
    for (std::size_t j = 0; j < n; ++j) feas.add_variable(0.0);
    for (std::size_t r = 0; r < e.rows(); ++r) {
      const auto row = e.row(r);
      feas.add_constraint(Vector(row.begin(), row.end()), Relation::Equal, q[r]);
    }
    if (solve_lp(feas, cfg).status == LpStatus::Infeasible) return {};

    LinearProgram rec;
    rec.sense = Sense::Maximize;
    for (std::size_t j = 0; j < n; ++j) rec.add_variable(1.0);
    for (std::size_t r = 0; r < e.rows(); ++r) {
      const auto row = e.row(r);
      rec.add_constraint(Vector(row.begin(), row.end()), Relation::Equal, 0.0);
    }
    rec.add_constraint(Vector(n, 1.0), Relation::LessEqual, 1.0);
    const auto s = solve_lp(rec, cfg);
    if (s.optimal() && *s.objective_value > 1e-9)
      fail(ErrorKind::UnboundedPolyhedron, "the polyhedron {θ ≥ 0 : Eθ = q} has a recession direction");
  }

  const auto reduced = independent_rows(e, q);
  if (!reduced) return {};
  const std::size_t r = reduced->a.rows();
  if (r == 0) return {Vector(n, 0.0)};
  if (detail::binomial(n, r) > static_cast<double>(vc.max_combinations))
    fail(ErrorKind::TooLarge, "vertex enumeration needs C(" + std::to_string(n) + "," + std::to_string(r) +
                                  ") basis candidates, above the configured cap");

  std::vector<Vector> out;
  std::vector<std::size_t> pick(r);
  for (std::size_t i = 0; i < r; ++i) pick[i] = i;
  for (;;) {
    Matrix b(r, r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < r; ++k) b(i, k) = reduced->a(i, pick[k]);
    if (auto sol = solve_dense(b, reduced->b, 1e-12)) {
      bool ok = true;
      for (double v : *sol)
        if (v < -vc.feas_tol) ok = false;
      if (ok) {
        Vector theta(n, 0.0);
        for (std::size_t k = 0; k < r; ++k) theta[pick[k]] = std::max(0.0, (*sol)[k]);
        if (max_abs(subtract(multiply(e, theta), q)) <= 1e-8 * std::max(1.0, max_abs(q))) {
          bool dup = false;
          for (const auto& v : out)
            if (max_abs(subtract(v, theta)) <= vc.dedup_tol) dup = true;
          if (!dup) out.push_back(std::move(theta));
        }
      }
    }
    // next combination in lexicographic order
    std::size_t i = r;
    while (i > 0 && pick[i - 1] == n - r + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < r; ++k) pick[k] = pick[k - 1] + 1;
  }
  return out;
}

}  // namespace wdro
