#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/geometry.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp.hpp"

namespace wdro {

struct Atom {
  Vector point;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finitely supported probability distribution.
struct DiscreteDistribution {
  std::vector<Atom> atoms;

  static DiscreteDistribution empirical(const std::vector<Vector>& samples) {
    DiscreteDistribution d;
    const double w = 1.0 / static_cast<double>(samples.size());
    for (const auto& x : samples) d.atoms.push_back({x, w});
    return d;
  }

  std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().point.size(); }

  double total_weight() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }

  template <class F>
  double expectation(F&& f) const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight * f(std::span<const double>(a.point));
    return s;
  }

  void validate(double tol = 1e-9) const {
    if (atoms.empty()) fail(ErrorKind::InvalidConfig, "distribution has no atoms");
    const std::size_t m = dim();
    for (const auto& a : atoms) {
      if (a.point.size() != m) fail(ErrorKind::DimensionMismatch, "atoms have inconsistent dimensions");
      if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) fail(ErrorKind::InvalidConfig, "atom weight must be >= 0");
      for (double v : a.point)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidConfig, "non-finite atom coordinate");
    }
    if (std::abs(total_weight() - 1.0) > tol) fail(ErrorKind::InvalidConfig, "atom weights must sum to 1");
  }

  /// Atoms closer than `tol` in every coordinate are combined; order of first occurrence is kept.
  DiscreteDistribution merged(double tol = 1e-12) const {
    DiscreteDistribution out;
    for (const auto& a : atoms) {
      auto it = std::find_if(out.atoms.begin(), out.atoms.end(),
                             [&](const Atom& b) { return max_abs(subtract(a.point, b.point)) <= tol; });
      if (it == out.atoms.end())
        out.atoms.push_back(a);
      else
        it->weight += a.weight;
    }
    return out;
  }
};

using GroundCost = std::function<double(std::span<const double>, std::span<const double>)>;

inline GroundCost norm_cost(GroundNorm n) {
  return [n](std::span<const double> x, std::span<const double> y) { return norm_value(subtract(x, y), n); };
}

/// Σ_t ‖x_t − y_t‖ over consecutive blocks of the given sizes.
inline GroundCost process_norm_cost(std::vector<std::size_t> blocks, GroundNorm n) {
  return [blocks = std::move(blocks), n](std::span<const double> x, std::span<const double> y) {
    double c = 0.0;
    std::size_t off = 0;
    for (std::size_t b : blocks) {
      c += norm_value(subtract(x.subspan(off, b), y.subspan(off, b)), n);
      off += b;
    }
    return c;
  };
}

struct TransportPlan {
  /// flow(i, j) moved from source atom i to target atom j of the merged distributions.
  Matrix flow;
  double cost = 0.0;
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
  DiscreteDistribution source;
  DiscreteDistribution target;
  /// Optimal value of the dual transportation LP.
  double dual_value = 0.0;
};

/// Optimal transport between two discrete distributions under an arbitrary ground cost.
inline TransportResult transport(const DiscreteDistribution& p, const DiscreteDistribution& q, const GroundCost& cost,
                                 const SolverConfig& cfg = {}) {
  p.validate();
  q.validate();
  if (p.dim() != q.dim()) fail(ErrorKind::DimensionMismatch, "distributions live in different dimensions");
  TransportResult r{0.0, {}, p.merged(), q.merged(), 0.0};
  const std::size_t ns = r.source.atoms.size(), nt = r.target.atoms.size();

  LinearProgram lp;
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) lp.add_variable(cost(r.source.atoms[i].point, r.target.atoms[j].point));
  lp.constraints.reserve(ns + nt);
  for (std::size_t i = 0; i < ns; ++i) {
    Vector row(ns * nt, 0.0);
    for (std::size_t j = 0; j < nt; ++j) row[i * nt + j] = 1.0;
    lp.add_constraint(std::move(row), Relation::Equal, r.source.atoms[i].weight);
  }
  // The last column constraint is implied by the others up to rounding of the weights.
  for (std::size_t j = 0; j + 1 < nt; ++j) {
    Vector row(ns * nt, 0.0);
    for (std::size_t i = 0; i < ns; ++i) row[i * nt + j] = 1.0;
    lp.add_constraint(std::move(row), Relation::Equal, r.target.atoms[j].weight);
  }
  const auto sol = solve_lp(lp, cfg);
  if (!sol.optimal()) fail(ErrorKind::SolveFailed, std::string("transportation LP ended ") + to_string(sol.status));
  r.plan.flow = Matrix(ns, nt);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j) r.plan.flow(i, j) = std::max(0.0, sol.primal[i * nt + j]);
  r.plan.cost = *sol.objective_value;
  r.distance = std::max(0.0, r.plan.cost);
  r.dual_value = dual_objective(lp, sol);
  return r;
}

inline TransportResult wasserstein_distance(const DiscreteDistribution& p, const DiscreteDistribution& q, GroundNorm n,
                                            const SolverConfig& cfg = {}) {
  return transport(p, q, norm_cost(n), cfg);
}

/// max_θ |E_P⟨θ, ξ⟩ − E_Q⟨θ, ξ⟩| over the given slopes, each with ‖θ‖_* ≤ 1.
inline double kr_dual_lower_bound(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                  const std::vector<Vector>& slopes, GroundNorm n) {
  p.validate();
  q.validate();
  if (p.dim() != q.dim()) fail(ErrorKind::DimensionMismatch, "distributions live in different dimensions");
  double best = 0.0;
  for (const auto& theta : slopes) {
    if (theta.size() != p.dim()) fail(ErrorKind::DimensionMismatch, "test slope has wrong dimension");
    const double lip = dual_norm_value(theta, n);
    if (lip > 1.0 + 1e-12)
      fail(ErrorKind::SlopeTooLarge, "test slope has dual norm " + detail::fmt_num(lip) + " > 1");
    auto f = [&](std::span<const double> x) { return dot(theta, x); };
    best = std::max(best, std::abs(p.expectation(f) - q.expectation(f)));
  }
  return best;
}

}  // namespace wdro
