#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "wdro/builder.hpp"
#include "wdro/errors.hpp"
#include "wdro/problem.hpp"
#include "wdro/reformulate.hpp"
#include "wdro/wasserstein.hpp"

namespace wdro {

struct ExtremalConfig {
  /// Pairs with α_ik at or below this carry no atom.
  double atom_tol = 1e-7;
};

/// Mass sent to infinity along `direction` from sample `sample` under piece `piece`.
struct EscapeRay {
  std::size_t sample = 0;
  std::size_t piece = 0;
  std::size_t stage = 0;
  Vector direction;
  /// Growth rate ⟨a_k, direction⟩ of the piece along the ray.
  double slope = 0.0;
  double mass = 0.0;
};

struct ExtremalResult {
  /// Retained atoms, renormalized to unit mass.
  DiscreteDistribution distribution;
  double retained_mass = 1.0;
  double escaping_mass = 0.0;
  std::vector<EscapeRay> escape_rays;
  double objective_value = 0.0;
  /// (1/N) Σ ‖q_ik‖ at the returned solution.
  double budget_used = 0.0;
};

/// Product-form result: marginals[i][t] is the stage-t marginal attached to sample i.
struct SeparableExtremalResult {
  std::vector<std::vector<DiscreteDistribution>> marginals;
  double escaping_mass = 0.0;
  std::vector<EscapeRay> escape_rays;
  double objective_value = 0.0;
  double budget_used = 0.0;

  /// (1/N) Σ_i ⊗_t marginals[i][t] as an explicit atom list.
  DiscreteDistribution flatten() const {
    DiscreteDistribution out;
    const double w = 1.0 / static_cast<double>(marginals.size());
    for (const auto& stages : marginals) {
      std::vector<Atom> partial{{{}, w}};
      for (const auto& marg : stages) {
        std::vector<Atom> next;
        for (const auto& head : partial)
          for (const auto& a : marg.atoms) {
            Atom c{head.point, head.weight * a.weight};
            c.point.insert(c.point.end(), a.point.begin(), a.point.end());
            next.push_back(std::move(c));
          }
        partial = std::move(next);
      }
      out.atoms.insert(out.atoms.end(), partial.begin(), partial.end());
    }
    return out;
  }
};

struct MembershipReport {
  double distance = 0.0;
  double radius = 0.0;
  bool member = false;
  double expected_loss = 0.0;
  double objective_value = 0.0;
};

namespace detail {

struct PairVars {
  std::size_t alpha = 0;
  std::vector<std::size_t> q;
};

/// Adds α_ik, q_ik for one block of samples; their (1/N)‖q_ik‖ terms are accumulated into `budget`.
inline std::vector<std::vector<PairVars>> emit_extremal_block(LpBuilder& bld, LinExpr& budget, const Dataset& samples,
                                                             const Polytope& xi, GroundNorm norm,
                                                             const PiecewiseAffineLoss& loss, double weight,
                                                             const std::string& tag) {
  const std::size_t m = xi.m;
  std::vector<std::vector<PairVars>> vars(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i];
    LinExpr mass;
    for (std::size_t k = 0; k < loss.pieces.size(); ++k) {
      const auto& pc = loss.pieces[k];
      PairVars pv;
      pv.alpha = bld.var(weight * pc(x), 0.0, kInf, tag + idx("alpha", i, k));
      mass.add(pv.alpha, 1.0);
      for (std::size_t j = 0; j < m; ++j)
        pv.q.push_back(bld.var(-weight * pc.a[j], -kInf, kInf,
                               tag + "q[" + std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(j) + "]"));
      // C(α ξ̂ − q) ≤ α d
      for (std::size_t r = 0; r < xi.num_rows(); ++r) {
        LinExpr e;
        e.add(pv.alpha, dot(xi.C.row(r), x) - xi.d[r]);
        for (std::size_t j = 0; j < m; ++j) e.add(pv.q[j], -xi.C(r, j));
        bld.row(e, Relation::LessEqual, 0.0);
      }
      if (norm == GroundNorm::One) {
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t t = bld.var(0.0, 0.0, kInf);
          for (double s : {1.0, -1.0}) {
            LinExpr e = LinExpr::var(pv.q[j], s);
            e.add(t, -1.0);
            bld.row(e, Relation::LessEqual, 0.0);
          }
          budget.add(t, weight);
        }
      } else {
        const std::size_t t = bld.var(0.0, 0.0, kInf);
        for (std::size_t j = 0; j < m; ++j)
          for (double s : {1.0, -1.0}) {
            LinExpr e = LinExpr::var(pv.q[j], s);
            e.add(t, -1.0);
            bld.row(e, Relation::LessEqual, 0.0);
          }
        budget.add(t, weight);
      }
      vars[i].push_back(std::move(pv));
    }
    bld.row(mass, Relation::Equal, 1.0);
  }
  return vars;
}

struct BlockSplit {
  std::vector<DiscreteDistribution> per_sample;
  std::vector<double> retained;
  std::vector<double> escaping;
  std::vector<EscapeRay> rays;
  double budget = 0.0;
};

/// Splits each sample's (α_ik, q_ik) into atoms ξ̂_i − q_ik/α_ik and escape rays.
inline BlockSplit split_block(const LpSolution& sol, const std::vector<std::vector<PairVars>>& vars,
                              const Dataset& samples, GroundNorm norm, const PiecewiseAffineLoss& loss,
                              const ExtremalConfig& ec, std::size_t stage) {
  BlockSplit out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    DiscreteDistribution d;
    double esc = 0.0;
    for (std::size_t k = 0; k < vars[i].size(); ++k) {
      const auto& pv = vars[i][k];
      const double alpha = std::max(0.0, sol.primal[pv.alpha]);
      Vector q(pv.q.size());
      for (std::size_t j = 0; j < q.size(); ++j) q[j] = sol.primal[pv.q[j]];
      const double qn = norm_value(q, norm);
      out.budget += qn / static_cast<double>(samples.size());
      if (alpha > ec.atom_tol) {
        Vector pt = samples[i];
        for (std::size_t j = 0; j < q.size(); ++j) pt[j] -= q[j] / alpha;
        d.atoms.push_back({std::move(pt), alpha});
      } else if (qn > ec.atom_tol) {
        EscapeRay ray{i, k, stage, q, 0.0, std::max(alpha, ec.atom_tol)};
        for (auto& v : ray.direction) v = -v / qn;
        ray.slope = dot(loss.pieces[k].a, ray.direction);
        esc += ray.mass;
        out.rays.push_back(std::move(ray));
      }
    }
    const double kept = d.total_weight();
    if (kept > 0.0)
      for (auto& a : d.atoms) a.weight /= kept;
    out.per_sample.push_back(std::move(d));
    out.retained.push_back(kept / (kept + esc));
    out.escaping.push_back(esc / (kept + esc));
  }
  return out;
}

inline Dataset stage_slice(const Dataset& samples, std::size_t off, std::size_t len) {
  Dataset part;
  for (const auto& x : samples)
    part.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(off), x.begin() + static_cast<std::ptrdiff_t>(off + len));
  return part;
}

}  // namespace detail

/// Worst-case distribution for a max-of-affine loss, from the dual of the reformulated program.
inline ExtremalResult worst_case_distribution(const DroProblem& problem, const SolverConfig& cfg = {},
                                              const ExtremalConfig& ec = {}) {
  const DroProblem p = validated(problem, nullptr, cfg);
  const auto& loss = detail::affine_loss(p, Composition::Max);
  const double w = 1.0 / static_cast<double>(p.size());
  BuildOptions opts;
  opts.lazy_norm_rows = LazyMode::Never;
  opts.variable_names = false;
  LpBuilder bld(Sense::Maximize, opts);
  LinExpr budget;
  const auto vars = detail::emit_extremal_block(bld, budget, p.samples, p.support, p.norm, loss, w, "");
  bld.row(budget, Relation::LessEqual, p.radius);
  const LinearProgram lp = std::move(bld).build();
  const auto sol = solve_lp(lp, cfg);
  if (!sol.optimal()) fail(ErrorKind::SolveFailed, std::string("extremal program ended ") + to_string(sol.status));

  const auto split = detail::split_block(sol, vars, p.samples, p.norm, loss, ec, 0);
  ExtremalResult r;
  r.objective_value = *sol.objective_value;
  r.budget_used = split.budget;
  r.escape_rays = split.rays;
  double kept = 0.0, esc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (const auto& a : split.per_sample[i].atoms) r.distribution.atoms.push_back({a.point, a.weight * split.retained[i] * w});
    kept += split.retained[i] * w;
    esc += split.escaping[i] * w;
  }
  if (kept > 0.0)
    for (auto& a : r.distribution.atoms) a.weight /= kept;
  r.retained_mass = kept / (kept + esc);
  r.escaping_mass = esc / (kept + esc);
  return r;
}

/// Product-form worst-case distribution for a separable loss.
inline SeparableExtremalResult worst_case_distribution_separable(const DroProblem& problem,
                                                                 const SolverConfig& cfg = {},
                                                                 const ExtremalConfig& ec = {}) {
  const DroProblem p = validated(problem, nullptr, cfg);
  const auto* sep = std::get_if<SeparableLoss>(&p.loss);
  if (!sep) fail(ErrorKind::InvalidConfig, "problem loss is not separable");
  const double w = 1.0 / static_cast<double>(p.size());
  BuildOptions opts;
  opts.lazy_norm_rows = LazyMode::Never;
  opts.variable_names = false;
  LpBuilder bld(Sense::Maximize, opts);
  LinExpr budget;
  std::vector<std::vector<std::vector<detail::PairVars>>> vars;
  std::vector<Dataset> parts;
  for (std::size_t t = 0; t < sep->stages.size(); ++t) {
    const auto& st = sep->stages[t];
    parts.push_back(detail::stage_slice(p.samples, sep->offset(t), st.support.m));
    vars.push_back(detail::emit_extremal_block(bld, budget, parts.back(), st.support, p.norm, st.loss, w,
                                               "t" + std::to_string(t) + "."));
  }
  bld.row(budget, Relation::LessEqual, p.radius);
  const LinearProgram lp = std::move(bld).build();
  const auto sol = solve_lp(lp, cfg);
  if (!sol.optimal()) fail(ErrorKind::SolveFailed, std::string("extremal program ended ") + to_string(sol.status));

  SeparableExtremalResult r;
  r.objective_value = *sol.objective_value;
  r.marginals.assign(p.size(), {});
  std::vector<double> kept(p.size(), 1.0);
  for (std::size_t t = 0; t < sep->stages.size(); ++t) {
    auto split = detail::split_block(sol, vars[t], parts[t], p.norm, sep->stages[t].loss, ec, t);
    r.budget_used += split.budget;
    r.escape_rays.insert(r.escape_rays.end(), split.rays.begin(), split.rays.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      r.marginals[i].push_back(std::move(split.per_sample[i]));
      kept[i] *= split.retained[i];
    }
  }
  for (double k : kept) r.escaping_mass += (1.0 - k) * w;
  return r;
}

namespace detail {

inline MembershipReport membership(const DiscreteDistribution& dist, double objective, const DroProblem& p,
                                   const GroundCost& cost, const SolverConfig& cfg, double tol) {
  MembershipReport rep;
  rep.radius = p.radius;
  rep.objective_value = objective;
  rep.distance = transport(DiscreteDistribution::empirical(p.samples), dist, cost, cfg).distance;
  rep.member = rep.distance <= p.radius + tol;
  rep.expected_loss = dist.expectation([&](std::span<const double> x) { return evaluate_loss(p.loss, x, cfg); });
  return rep;
}

inline std::vector<std::size_t> stage_blocks(const DroProblem& p) {
  std::vector<std::size_t> blocks;
  if (const auto* sep = std::get_if<SeparableLoss>(&p.loss))
    for (const auto& st : sep->stages) blocks.push_back(st.support.m);
  else
    blocks.push_back(p.dim());
  return blocks;
}

}  // namespace detail

/// Transport distance from the empirical distribution to an extremal output, checked against the radius.
inline MembershipReport verify_membership(const ExtremalResult& r, const DroProblem& problem,
                                          const SolverConfig& cfg = {}, double tol = 1e-6) {
  const DroProblem p = validated(problem, nullptr, cfg);
  if (r.escaping_mass > 0.0) {
    const double retained =
        transport(DiscreteDistribution::empirical(p.samples), r.distribution, norm_cost(p.norm), cfg).distance;
    fail(ErrorKind::EscapingMassPresent, "escaping mass " + detail::fmt_num(r.escaping_mass) +
                                             "; retained part has transport cost " + detail::fmt_num(retained));
  }
  return detail::membership(r.distribution, r.objective_value, p, norm_cost(p.norm), cfg, tol);
}

inline MembershipReport verify_membership(const SeparableExtremalResult& r, const DroProblem& problem,
                                          const SolverConfig& cfg = {}, double tol = 1e-6) {
  const DroProblem p = validated(problem, nullptr, cfg);
  const auto cost = process_norm_cost(detail::stage_blocks(p), p.norm);
  const auto flat = r.flatten();
  if (r.escaping_mass > 0.0) {
    const double retained = transport(DiscreteDistribution::empirical(p.samples), flat, cost, cfg).distance;
    fail(ErrorKind::EscapingMassPresent, "escaping mass " + detail::fmt_num(r.escaping_mass) +
                                             "; retained part has transport cost " + detail::fmt_num(retained));
  }
  return detail::membership(flat, r.objective_value, p, cost, cfg, tol);
}

}  // namespace wdro
