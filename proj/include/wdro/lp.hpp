#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/linalg.hpp"

namespace wdro {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class LpStatus { Optimal, Infeasible, Unbounded };

constexpr const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct Constraint {
  Vector coefficients;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  /// Lazy rows are only added to the working program once they are violated.
  bool lazy = false;
  /// Lazy rows sharing a group id are separated together; at most one row per group is added per round.
  int group = -1;
};

struct LinearProgram {
  Sense sense = Sense::Minimize;
  Vector costs;
  std::vector<Constraint> constraints;
  Vector lower;
  Vector upper;
  std::vector<std::string> names;

  std::size_t num_variables() const noexcept { return costs.size(); }
  std::size_t num_constraints() const noexcept { return constraints.size(); }

  std::size_t add_variable(double cost, double lo = 0.0, double up = kInf, std::string name = {}) {
    costs.push_back(cost);
    lower.push_back(lo);
    upper.push_back(up);
    if (!name.empty() || !names.empty()) {
      names.resize(costs.size() - 1);
      names.push_back(std::move(name));
    }
    for (auto& c : constraints) c.coefficients.push_back(0.0);
    return costs.size() - 1;
  }

  std::size_t add_constraint(Vector row, Relation rel, double rhs) {
    constraints.push_back({std::move(row), rel, rhs});
    return constraints.size() - 1;
  }

  /// Throws MalformedProgram if any invariant is broken.
  void validate() const {
    const std::size_t n = costs.size();
    if (lower.size() != n || upper.size() != n)
      fail(ErrorKind::MalformedProgram, "bound vectors must have length n_vars");
    if (!names.empty() && names.size() != n) fail(ErrorKind::MalformedProgram, "names must have length n_vars");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(costs[j])) fail(ErrorKind::MalformedProgram, "non-finite cost");
      if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
          upper[j] == -kInf)
        fail(ErrorKind::MalformedProgram, "invalid bounds for variable " + std::to_string(j));
    }
    for (std::size_t r = 0; r < constraints.size(); ++r) {
      const auto& c = constraints[r];
      if (c.coefficients.size() != n)
        fail(ErrorKind::MalformedProgram, "row " + std::to_string(r) + " has length " +
                                              std::to_string(c.coefficients.size()) + ", expected " +
                                              std::to_string(n));
      if (!std::isfinite(c.rhs)) fail(ErrorKind::MalformedProgram, "non-finite rhs in row " + std::to_string(r));
      for (double v : c.coefficients)
        if (!std::isfinite(v)) fail(ErrorKind::MalformedProgram, "non-finite coefficient in row " + std::to_string(r));
    }
  }
};

struct SolverConfig {
  double feas_tol = 1e-9;
  double gap_tol = 1e-8;
  double pivot_tol = 1e-10;
  double comp_tol = 1e-8;
  double optimality_tol = 1e-9;
  /// Tableau entries below this magnitude are flushed to zero.
  double zero_tol = 1e-14;
  /// Dantzig pricing switches to Bland's rule after this many multiples of (n_vars + n_cons) iterations.
  std::size_t bland_factor = 10;
  /// Hard iteration cap as a multiple of (n_vars + n_cons); exceeded only on numerical trouble.
  std::size_t iteration_factor = 200;
  /// Honour the lazy flag on constraints.
  bool lazy_rows = true;
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::optional<double> objective_value;
  Vector primal;
  /// Sensitivity of the optimal value to each rhs.
  Vector duals;
  /// Reduced costs cⱼ − Aⱼᵀy of the structural variables.
  Vector reduced_costs;
  std::optional<Vector> ray;
  std::size_t iterations = 0;
  std::size_t rows_used = 0;

  bool optimal() const noexcept { return status == LpStatus::Optimal; }
};

}  // namespace wdro

#include "wdro/detail/simplex.hpp"

namespace wdro {

namespace detail {

inline LpSolution solve_dense_lp(const LinearProgram& lp, const std::vector<std::size_t>& rows,
                                 const SolverConfig& cfg) {
  const std::size_t n = lp.num_variables();
  const double sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;
  Vector c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = sign * lp.costs[j];
  std::vector<const Constraint*> cons;
  cons.reserve(rows.size());
  for (std::size_t r : rows) cons.push_back(&lp.constraints[r]);

  Simplex simplex(cons, c, lp.lower, lp.upper, cfg);
  SimplexResult res = simplex.run();

  LpSolution out;
  out.status = res.status;
  out.iterations = res.iterations;
  out.rows_used = rows.size();
  out.primal = std::move(res.x);
  out.duals.assign(lp.num_constraints(), 0.0);
  out.reduced_costs.assign(n, 0.0);
  if (res.status == LpStatus::Optimal) {
    for (std::size_t k = 0; k < rows.size(); ++k) out.duals[rows[k]] = sign * res.y[k];
    for (std::size_t j = 0; j < n; ++j) out.reduced_costs[j] = sign * res.reduced[j];
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += lp.costs[j] * out.primal[j];
    out.objective_value = obj;
  } else if (res.status == LpStatus::Unbounded) {
    out.ray = std::move(res.ray);
  }
  return out;
}

inline double row_activity(const Constraint& c, const Vector& x) { return dot(c.coefficients, x); }

inline double row_violation(const Constraint& c, const Vector& x) {
  const double act = row_activity(c, x);
  switch (c.relation) {
    case Relation::LessEqual: return act - c.rhs;
    case Relation::GreaterEqual: return c.rhs - act;
    case Relation::Equal: return std::abs(act - c.rhs);
  }
  return 0.0;
}

}  // namespace detail

/// Solves the program with a bounded-variable two-phase simplex.
/// Lazy rows are handled by cutting-plane rounds over the eager rows.
inline LpSolution solve_lp(const LinearProgram& lp, const SolverConfig& cfg = {}) {
  lp.validate();
  std::vector<std::size_t> active;
  std::vector<std::size_t> pending;
  for (std::size_t r = 0; r < lp.num_constraints(); ++r) {
    if (cfg.lazy_rows && lp.constraints[r].lazy)
      pending.push_back(r);
    else
      active.push_back(r);
  }
  if (pending.empty()) return detail::solve_dense_lp(lp, active, cfg);

  std::size_t total_iterations = 0;
  std::vector<char> in_model(lp.num_constraints(), 0);
  for (std::size_t r : active) in_model[r] = 1;
  for (;;) {
    LpSolution sol = detail::solve_dense_lp(lp, active, cfg);
    total_iterations += sol.iterations;
    if (sol.status == LpStatus::Infeasible) {
      sol.iterations = total_iterations;
      return sol;
    }
    if (sol.status == LpStatus::Unbounded) {
      std::vector<std::size_t> all(lp.num_constraints());
      for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
      LpSolution full = detail::solve_dense_lp(lp, all, cfg);
      full.iterations += total_iterations;
      return full;
    }
    const double scale = std::max(1.0, max_abs(sol.primal));
    std::map<int, std::pair<double, std::size_t>> worst;
    std::vector<std::size_t> ungrouped;
    for (std::size_t r : pending) {
      if (in_model[r]) continue;
      const double v = detail::row_violation(lp.constraints[r], sol.primal);
      if (v <= cfg.feas_tol * scale) continue;
      const int g = lp.constraints[r].group;
      if (g < 0) {
        ungrouped.push_back(r);
        continue;
      }
      auto it = worst.find(g);
      if (it == worst.end() || v > it->second.first) worst[g] = {v, r};
    }
    if (worst.empty() && ungrouped.empty()) {
      sol.iterations = total_iterations;
      return sol;
    }
    for (std::size_t r : ungrouped) in_model[r] = 1;
    for (const auto& [g, vr] : worst) in_model[vr.second] = 1;
    active.clear();
    for (std::size_t r = 0; r < lp.num_constraints(); ++r)
      if (in_model[r]) active.push_back(r);
  }
}

/// Textbook dual. Finite bounds other than sign restrictions become explicit rows of the primal first.
inline LinearProgram dual_of(const LinearProgram& lp) {
  lp.validate();
  const std::size_t n = lp.num_variables();
  const bool is_min = lp.sense == Sense::Minimize;

  std::vector<Constraint> rows = lp.constraints;
  enum class SignClass { NonNegative, NonPositive, Free };
  std::vector<SignClass> sign(n, SignClass::Free);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower[j], up = lp.upper[j];
    auto unit = [&](Relation rel, double rhs) {
      Constraint c{Vector(n, 0.0), rel, rhs};
      c.coefficients[j] = 1.0;
      rows.push_back(std::move(c));
    };
    if (lo == 0.0) {
      sign[j] = SignClass::NonNegative;
      if (up != kInf) unit(Relation::LessEqual, up);
    } else if (up == 0.0) {
      sign[j] = SignClass::NonPositive;
      if (lo != -kInf) unit(Relation::GreaterEqual, lo);
    } else {
      if (lo != -kInf) unit(Relation::GreaterEqual, lo);
      if (up != kInf) unit(Relation::LessEqual, up);
    }
  }

  const std::size_t m = rows.size();
  LinearProgram d;
  d.sense = is_min ? Sense::Maximize : Sense::Minimize;
  for (std::size_t r = 0; r < m; ++r) {
    double lo = -kInf, up = kInf;
    const Relation rel = rows[r].relation;
    // min: ≥ rows carry y ≥ 0, ≤ rows y ≤ 0. max: the reverse.
    if (rel == Relation::GreaterEqual) (is_min ? lo : up) = 0.0;
    if (rel == Relation::LessEqual) (is_min ? up : lo) = 0.0;
    d.add_variable(rows[r].rhs, lo, up, "y" + std::to_string(r));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Vector col(m);
    for (std::size_t r = 0; r < m; ++r) col[r] = rows[r].coefficients[j];
    Relation rel = Relation::Equal;
    if (sign[j] == SignClass::NonNegative) rel = is_min ? Relation::LessEqual : Relation::GreaterEqual;
    if (sign[j] == SignClass::NonPositive) rel = is_min ? Relation::GreaterEqual : Relation::LessEqual;
    d.add_constraint(std::move(col), rel, lp.costs[j]);
  }
  return d;
}

/// Objective of the dual solution: bᵀy plus reduced-cost contributions of variables resting on bounds.
inline double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  double v = 0.0;
  for (std::size_t r = 0; r < lp.num_constraints(); ++r) v += lp.constraints[r].rhs * sol.duals[r];
  for (std::size_t j = 0; j < lp.num_variables(); ++j)
    if (sol.reduced_costs[j] != 0.0) v += sol.reduced_costs[j] * sol.primal[j];
  return v;
}

/// Largest violation of rows and bounds at `x`.
inline double primal_residual(const LinearProgram& lp, const Vector& x) {
  double r = 0.0;
  for (const auto& c : lp.constraints) r = std::max(r, detail::row_violation(c, x));
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    r = std::max(r, lp.lower[j] - x[j]);
    r = std::max(r, x[j] - lp.upper[j]);
  }
  return r;
}

/// Largest |yᵣ · slackᵣ| over rows.
inline double complementarity_residual(const LinearProgram& lp, const LpSolution& sol) {
  double r = 0.0;
  for (std::size_t k = 0; k < lp.num_constraints(); ++k) {
    const auto& c = lp.constraints[k];
    const double slack = c.rhs - detail::row_activity(c, sol.primal);
    r = std::max(r, std::abs(sol.duals[k] * slack));
  }
  return r;
}

namespace detail {
inline std::string fmt_num(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Plain-text dump: one VAR line per variable, one ROW line per constraint listing nonzeros.
inline void write_lp(std::ostream& os, const LinearProgram& lp) {
  os << "LP " << (lp.sense == Sense::Minimize ? "min" : "max") << " vars " << lp.num_variables() << " rows "
     << lp.num_constraints() << "\n";
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    os << "VAR " << j << ' ' << (lp.names.empty() || lp.names[j].empty() ? "x" + std::to_string(j) : lp.names[j])
       << ' ' << detail::fmt_num(lp.lower[j]) << ' ' << detail::fmt_num(lp.upper[j]) << ' '
       << detail::fmt_num(lp.costs[j]) << "\n";
  }
  for (std::size_t r = 0; r < lp.num_constraints(); ++r) {
    const auto& c = lp.constraints[r];
    const char* rel = c.relation == Relation::LessEqual ? "<=" : c.relation == Relation::Equal ? "=" : ">=";
    os << "ROW " << r << ' ' << rel << ' ' << detail::fmt_num(c.rhs) << (c.lazy ? " lazy" : "") << " :";
    for (std::size_t j = 0; j < c.coefficients.size(); ++j)
      if (c.coefficients[j] != 0.0) os << ' ' << j << ':' << detail::fmt_num(c.coefficients[j]);
    os << "\n";
  }
}

inline void write_lp_file(const std::string& path, const LinearProgram& lp) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::InvalidConfig, "cannot open " + path + " for writing");
  write_lp(f, lp);
}

}  // namespace wdro
