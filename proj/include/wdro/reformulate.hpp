#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "wdro/builder.hpp"
#include "wdro/errors.hpp"
#include "wdro/geometry.hpp"
#include "wdro/lp.hpp"
#include "wdro/problem.hpp"

namespace wdro {

/// A lowered worst-case expectation problem and the indices of its key variables.
struct Reformulation {
  LinearProgram lp;
  std::size_t lambda = 0;
  /// Epigraph variable per sample (per stage and sample for separable losses, stage-major).
  std::vector<std::size_t> s;
};

namespace detail {

/// Affine piece whose coefficients may depend on LP variables.
struct SymbolicPiece {
  std::vector<LinExpr> a;
  LinExpr b;
};

inline std::vector<SymbolicPiece> constant_pieces(const PiecewiseAffineLoss& loss) {
  std::vector<SymbolicPiece> out;
  for (const auto& p : loss.pieces) {
    SymbolicPiece sp;
    for (double v : p.a) sp.a.emplace_back(v);
    sp.b = LinExpr(p.b);
    out.push_back(std::move(sp));
  }
  return out;
}

inline std::string idx(const char* base, std::size_t i) { return std::string(base) + "[" + std::to_string(i) + "]"; }

inline std::string idx(const char* base, std::size_t i, std::size_t k) {
  return std::string(base) + "[" + std::to_string(i) + "," + std::to_string(k) + "]";
}

/// d − Cξ̂
inline Vector support_slack(const Polytope& xi, std::span<const double> sample) {
  Vector r(xi.num_rows());
  for (std::size_t q = 0; q < xi.num_rows(); ++q) r[q] = xi.d[q] - dot(xi.C.row(q), sample);
  return r;
}

/// Rows b_k + ⟨a_k, ξ̂_i⟩ + ⟨γ_ik, d − Cξ̂_i⟩ ≤ s_i and ‖Cᵀγ_ik − a_k‖_* ≤ λ for every sample and piece.
inline std::vector<std::size_t> emit_max_affine(LpBuilder& bld, const Dataset& samples, const Polytope& xi,
                                                GroundNorm norm, const std::vector<SymbolicPiece>& pieces,
                                                std::size_t lambda, double weight, const std::string& tag = {}) {
  const std::size_t m = xi.m;
  const std::size_t rows = xi.num_rows();
  std::vector<std::size_t> s;
  s.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& x = samples[i];
    const std::size_t si = bld.var(weight, -kInf, kInf, tag + idx("s", i));
    s.push_back(si);
    const Vector slack = support_slack(xi, x);
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const auto& pc = pieces[k];
      LinExpr lhs = pc.b;
      for (std::size_t j = 0; j < m; ++j) lhs.add(pc.a[j], x[j]);
      std::vector<LinExpr> v(m);
      for (std::size_t j = 0; j < m; ++j) v[j].add(pc.a[j], -1.0);
      for (std::size_t q = 0; q < rows; ++q) {
        const std::size_t g = bld.var(0.0, 0.0, kInf, tag + "gamma[" + std::to_string(i) + "," + std::to_string(k) +
                                                          "," + std::to_string(q) + "]");
        lhs.add(g, slack[q]);
        for (std::size_t j = 0; j < m; ++j) v[j].add(g, xi.C(q, j));
      }
      lhs.add(si, -1.0);
      bld.row(lhs, Relation::LessEqual, 0.0);
      bld.dual_norm_at_most(std::move(v), lambda, norm);
    }
  }
  return s;
}

inline const PiecewiseAffineLoss& affine_loss(const DroProblem& p, Composition expected) {
  const auto* loss = std::get_if<PiecewiseAffineLoss>(&p.loss);
  if (!loss) fail(ErrorKind::InvalidConfig, "problem loss is not piecewise affine");
  if (loss->composition != expected)
    fail(ErrorKind::InvalidConfig, expected == Composition::Max ? "loss composition must be max"
                                                                 : "loss composition must be min");
  return *loss;
}

}  // namespace detail

/// Worst-case expectation of a max of affine functions.
inline Reformulation build_max_affine(const DroProblem& problem, const BuildOptions& opts = {}) {
  const DroProblem p = validated(problem);
  const PiecewiseAffineLoss loss = detail::affine_loss(p, Composition::Max).deduplicated();
  LpBuilder bld(Sense::Minimize, opts);
  Reformulation out;
  out.lambda = bld.var(p.radius, 0.0, kInf, "lambda");
  out.s = detail::emit_max_affine(bld, p.samples, p.support, p.norm, detail::constant_pieces(loss), out.lambda,
                                  1.0 / static_cast<double>(p.size()));
  out.lp = std::move(bld).build();
  return out;
}

/// Worst-case expectation of a min of affine functions.
inline Reformulation build_min_affine(const DroProblem& problem, const BuildOptions& opts = {}) {
  const DroProblem p = validated(problem);
  const PiecewiseAffineLoss loss = detail::affine_loss(p, Composition::Min).deduplicated();
  const Polytope& xi = p.support;
  const std::size_t m = p.dim(), K = loss.pieces.size();
  LpBuilder bld(Sense::Minimize, opts);
  Reformulation out;
  out.lambda = bld.var(p.radius, 0.0, kInf, "lambda");
  const double w = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& x = p.samples[i];
    const std::size_t si = bld.var(w, -kInf, kInf, detail::idx("s", i));
    out.s.push_back(si);
    LinExpr lhs, simplex;
    std::vector<LinExpr> v(m);
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t th = bld.var(0.0, 0.0, kInf, detail::idx("theta", i, k));
      lhs.add(th, loss.pieces[k](x));
      simplex.add(th, 1.0);
      for (std::size_t j = 0; j < m; ++j) v[j].add(th, -loss.pieces[k].a[j]);
    }
    const Vector slack = detail::support_slack(xi, x);
    for (std::size_t q = 0; q < xi.num_rows(); ++q) {
      const std::size_t g = bld.var(0.0, 0.0, kInf, detail::idx("gamma", i, q));
      lhs.add(g, slack[q]);
      for (std::size_t j = 0; j < m; ++j) v[j].add(g, xi.C(q, j));
    }
    lhs.add(si, -1.0);
    bld.row(lhs, Relation::LessEqual, 0.0);
    bld.row(simplex, Relation::Equal, 1.0);
    bld.dual_norm_at_most(std::move(v), out.lambda, p.norm);
  }
  out.lp = std::move(bld).build();
  return out;
}

/// sup over the ball of Q[ξ ∉ {Aξ < b}].
inline Reformulation build_uq_worst(const DroProblem& problem, const UqSet& unsafe, const BuildOptions& opts = {},
                                    const SolverConfig& cfg = {}) {
  const DroProblem p = validated(problem);
  const Polytope& xi = p.support;
  const std::size_t m = p.dim(), K = unsafe.b.size();
  unsafe.validate(m);
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = unsafe.A.row(k);
    Constraint c{Vector(row.begin(), row.end()), Relation::GreaterEqual, unsafe.b[k]};
    if (!find_point(xi, {c}, cfg))
      fail(ErrorKind::HypothesisViolated, "halfspace " + std::to_string(k) + " of the unsafe set misses the support");
  }
  LpBuilder bld(Sense::Minimize, opts);
  Reformulation out;
  out.lambda = bld.var(p.radius, 0.0, kInf, "lambda");
  const double w = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& x = p.samples[i];
    const std::size_t si = bld.var(w, 0.0, kInf, detail::idx("s", i));
    out.s.push_back(si);
    const Vector slack = detail::support_slack(xi, x);
    for (std::size_t k = 0; k < K; ++k) {
      const auto a = unsafe.A.row(k);
      const std::size_t th = bld.var(0.0, 0.0, kInf, detail::idx("theta", i, k));
      LinExpr lhs(1.0);
      lhs.add(th, -(unsafe.b[k] - dot(a, x)));
      std::vector<LinExpr> v(m);
      for (std::size_t j = 0; j < m; ++j) v[j].add(th, a[j]);
      for (std::size_t q = 0; q < xi.num_rows(); ++q) {
        const std::size_t g = bld.var(0.0, 0.0, kInf,
                                      "gamma[" + std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(q) + "]");
        lhs.add(g, slack[q]);
        for (std::size_t j = 0; j < m; ++j) v[j].add(g, -xi.C(q, j));
      }
      lhs.add(si, -1.0);
      bld.row(lhs, Relation::LessEqual, 0.0);
      bld.dual_norm_at_most(std::move(v), out.lambda, p.norm);
    }
  }
  out.lp = std::move(bld).build();
  return out;
}

/// sup over the ball of Q[ξ ∈ {Aξ ≤ b}].
inline Reformulation build_uq_best(const DroProblem& problem, const UqSet& safe, const BuildOptions& opts = {},
                                   const SolverConfig& cfg = {}) {
  const DroProblem p = validated(problem);
  const Polytope& xi = p.support;
  const std::size_t m = p.dim(), K = safe.b.size();
  safe.validate(m);
  {
    std::vector<Constraint> rows;
    for (std::size_t k = 0; k < K; ++k) {
      const auto row = safe.A.row(k);
      rows.push_back({Vector(row.begin(), row.end()), Relation::LessEqual, safe.b[k]});
    }
    if (!find_point(xi, rows, cfg)) fail(ErrorKind::HypothesisViolated, "the safe set does not meet the support");
  }
  LpBuilder bld(Sense::Minimize, opts);
  Reformulation out;
  out.lambda = bld.var(p.radius, 0.0, kInf, "lambda");
  const double w = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& x = p.samples[i];
    const std::size_t si = bld.var(w, 0.0, kInf, detail::idx("s", i));
    out.s.push_back(si);
    LinExpr lhs(1.0);
    std::vector<LinExpr> v(m);
    for (std::size_t k = 0; k < K; ++k) {
      const auto a = safe.A.row(k);
      const std::size_t th = bld.var(0.0, 0.0, kInf, detail::idx("theta", i, k));
      lhs.add(th, safe.b[k] - dot(a, x));
      for (std::size_t j = 0; j < m; ++j) v[j].add(th, a[j]);
    }
    const Vector slack = detail::support_slack(xi, x);
    for (std::size_t q = 0; q < xi.num_rows(); ++q) {
      const std::size_t g = bld.var(0.0, 0.0, kInf, detail::idx("gamma", i, q));
      lhs.add(g, slack[q]);
      for (std::size_t j = 0; j < m; ++j) v[j].add(g, xi.C(q, j));
    }
    lhs.add(si, -1.0);
    bld.row(lhs, Relation::LessEqual, 0.0);
    bld.dual_norm_at_most(std::move(v), out.lambda, p.norm);
  }
  out.lp = std::move(bld).build();
  return out;
}

/// Affine pieces ⟨Hᵀv_k, ξ⟩ + ⟨v_k, h⟩ from the vertices of {θ ≥ 0 : Wᵀθ = q}.
inline PiecewiseAffineLoss two_stage_pieces(const TwoStageSpec& spec, const VertexConfig& vc = {}) {
  std::vector<Vector> verts;
  try {
    verts = enumerate_vertices(spec.W.transposed(), spec.q, vc);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnboundedPolyhedron)
      fail(ErrorKind::DualPolytopeUnbounded, "the dual feasible set {θ ≥ 0 : Wᵀθ = q} is unbounded");
    throw;
  }
  if (verts.empty()) fail(ErrorKind::HypothesisViolated, "the dual feasible set {θ ≥ 0 : Wᵀθ = q} is empty");
  PiecewiseAffineLoss loss{{}, Composition::Max};
  for (const auto& v : verts) loss.pieces.push_back({multiply_transposed(spec.H, v), dot(v, spec.h)});
  return loss;
}

namespace detail {
inline void check_recourse_set(const TwoStageSpec& spec, const SolverConfig& cfg) {
  const std::size_t ny = spec.W.cols();
  LinearProgram lp;
  for (std::size_t l = 0; l < ny; ++l) lp.add_variable(0.0, -kInf, kInf);
  for (std::size_t r = 0; r < spec.W.rows(); ++r) {
    const auto row = spec.W.row(r);
    lp.add_constraint(Vector(row.begin(), row.end()), Relation::GreaterEqual, spec.h[r]);
  }
  if (solve_lp(lp, cfg).status == LpStatus::Infeasible)
    fail(ErrorKind::HypothesisViolated, "the recourse set {y : Wy ≥ h} is empty");
  for (std::size_t l = 0; l < ny; ++l) {
    for (double sgn : {1.0, -1.0}) {
      lp.costs.assign(ny, 0.0);
      lp.costs[l] = sgn;
      if (solve_lp(lp, cfg).status == LpStatus::Unbounded)
        fail(ErrorKind::RecourseSetUnbounded, "the recourse set {y : Wy ≥ h} is unbounded in coordinate " +
                                                  std::to_string(l));
    }
  }
}
}  // namespace detail

inline Reformulation build_two_stage(const DroProblem& problem, const BuildOptions& opts = {},
                                     const SolverConfig& cfg = {}) {
  const auto* spec = std::get_if<TwoStageSpec>(&problem.loss);
  if (!spec) fail(ErrorKind::InvalidConfig, "problem loss is not a two-stage specification");
  if (spec->variant == TwoStageVariant::RhsUncertainty) {
    DroProblem q = problem;
    q.loss = two_stage_pieces(*spec);
    return build_max_affine(q, opts);
  }
  const DroProblem p = validated(problem);
  detail::check_recourse_set(*spec, cfg);
  const Polytope& xi = p.support;
  const std::size_t m = p.dim(), ny = spec->W.cols();
  LpBuilder bld(Sense::Minimize, opts);
  Reformulation out;
  out.lambda = bld.var(p.radius, 0.0, kInf, "lambda");
  const double w = 1.0 / static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& x = p.samples[i];
    const std::size_t si = bld.var(w, -kInf, kInf, detail::idx("s", i));
    out.s.push_back(si);
    const Vector qx = multiply(spec->Q, x);
    LinExpr lhs;
    std::vector<LinExpr> v(m);
    std::vector<std::size_t> y(ny);
    for (std::size_t l = 0; l < ny; ++l) {
      y[l] = bld.var(0.0, -kInf, kInf, detail::idx("y", i, l));
      lhs.add(y[l], qx[l]);
      for (std::size_t j = 0; j < m; ++j) v[j].add(y[l], spec->Q(l, j));
    }
    const Vector slack = detail::support_slack(xi, x);
    for (std::size_t q = 0; q < xi.num_rows(); ++q) {
      const std::size_t g = bld.var(0.0, 0.0, kInf, detail::idx("gamma", i, q));
      lhs.add(g, slack[q]);
      for (std::size_t j = 0; j < m; ++j) v[j].add(g, -xi.C(q, j));
    }
    lhs.add(si, -1.0);
    bld.row(lhs, Relation::LessEqual, 0.0);
    for (std::size_t r = 0; r < spec->W.rows(); ++r) {
      LinExpr wy;
      for (std::size_t l = 0; l < ny; ++l) wy.add(y[l], spec->W(r, l));
      bld.row(wy, Relation::GreaterEqual, spec->h[r]);
    }
    bld.dual_norm_at_most(std::move(v), out.lambda, p.norm);
  }
  out.lp = std::move(bld).build();
  return out;
}

/// Additively separable loss with a shared transport budget over the process norm Σ_t ‖ξ_t‖.
inline Reformulation build_separable(const DroProblem& problem, const BuildOptions& opts = {}) {
  const DroProblem p = validated(problem);
  const auto* sep = std::get_if<SeparableLoss>(&p.loss);
  if (!sep) fail(ErrorKind::InvalidConfig, "problem loss is not separable");
  LpBuilder bld(Sense::Minimize, opts);
  Reformulation out;
  out.lambda = bld.var(p.radius, 0.0, kInf, "lambda");
  const double w = 1.0 / static_cast<double>(p.size());
  for (std::size_t t = 0; t < sep->stages.size(); ++t) {
    const auto& st = sep->stages[t];
    const std::size_t off = sep->offset(t);
    Dataset part;
    for (const auto& x : p.samples)
      part.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(off),
                        x.begin() + static_cast<std::ptrdiff_t>(off + st.support.m));
    const auto s = detail::emit_max_affine(bld, part, st.support, p.norm,
                                           detail::constant_pieces(st.loss.deduplicated()), out.lambda, w,
                                           "t" + std::to_string(t) + ".");
    out.s.insert(out.s.end(), s.begin(), s.end());
  }
  out.lp = std::move(bld).build();
  return out;
}

/// κε + SAA with κ = max_k ‖a_k‖_*; exact when Ξ = ℝᵐ.
inline double convex_closed_form(const DroProblem& problem) {
  const auto& loss = detail::affine_loss(problem, Composition::Max);
  if (!problem.support.is_whole_space())
    fail(ErrorKind::SupportNotFullSpace, "closed form requires an unconstrained support");
  if (problem.samples.empty()) fail(ErrorKind::DatasetTooSmall, "at least one sample is required");
  double avg = 0.0;
  for (const auto& x : problem.samples) avg += loss(x);
  avg /= static_cast<double>(problem.size());
  return loss.kappa(problem.norm) * problem.radius + avg;
}

/// Dispatches on the loss type.
inline Reformulation build_reformulation(const DroProblem& p, const BuildOptions& opts = {},
                                         const SolverConfig& cfg = {}) {
  return std::visit(
      [&](const auto& l) -> Reformulation {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PiecewiseAffineLoss>) {
          return l.composition == Composition::Max ? build_max_affine(p, opts) : build_min_affine(p, opts);
        } else if constexpr (std::is_same_v<T, UqSet>) {
          return l.kind == UqKind::Worst ? build_uq_worst(p, l, opts, cfg) : build_uq_best(p, l, opts, cfg);
        } else if constexpr (std::is_same_v<T, TwoStageSpec>) {
          return build_two_stage(p, opts, cfg);
        } else {
          return build_separable(p, opts);
        }
      },
      p.loss);
}

struct WorstCaseResult {
  LpStatus status = LpStatus::Infeasible;
  /// +∞ unless the program solved to optimality.
  double value = kInf;
  Reformulation model;
  LpSolution solution;
};

inline WorstCaseResult worst_case_value(const DroProblem& p, const SolverConfig& cfg = {},
                                        const BuildOptions& opts = {}) {
  WorstCaseResult r;
  r.model = build_reformulation(p, opts, cfg);
  r.solution = solve_lp(r.model.lp, cfg);
  r.status = r.solution.status;
  if (r.solution.optimal()) r.value = *r.solution.objective_value;
  return r;
}

/// Recourse value min{⟨y, Qξ⟩ : Wy ≥ h} or min{⟨q, y⟩ : Wy ≥ Hξ + h} by direct LP.
inline double two_stage_loss(const TwoStageSpec& spec, std::span<const double> xi, const SolverConfig& cfg = {}) {
  const std::size_t ny = spec.W.cols();
  LinearProgram lp;
  Vector cost = spec.variant == TwoStageVariant::ObjectiveUncertainty ? multiply(spec.Q, xi) : spec.q;
  Vector rhs = spec.h;
  if (spec.variant == TwoStageVariant::RhsUncertainty) {
    const Vector hx = multiply(spec.H, xi);
    for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] += hx[r];
  }
  for (std::size_t l = 0; l < ny; ++l) lp.add_variable(cost[l], -kInf, kInf);
  for (std::size_t r = 0; r < spec.W.rows(); ++r) {
    const auto row = spec.W.row(r);
    lp.add_constraint(Vector(row.begin(), row.end()), Relation::GreaterEqual, rhs[r]);
  }
  const auto s = solve_lp(lp, cfg);
  if (s.status == LpStatus::Infeasible) return kInf;
  if (s.status == LpStatus::Unbounded) return -kInf;
  return *s.objective_value;
}

/// Loss of a single outcome.
inline double evaluate_loss(const Loss& loss, std::span<const double> xi, const SolverConfig& cfg = {}) {
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, TwoStageSpec>)
          return two_stage_loss(l, xi, cfg);
        else
          return l(xi);
      },
      loss);
}

/// (1/N) Σ ℓ(ξ̂_i)
inline double sample_average_loss(const DroProblem& p, const SolverConfig& cfg = {}) {
  double s = 0.0;
  for (const auto& x : p.samples) s += evaluate_loss(p.loss, x, cfg);
  return s / static_cast<double>(p.size());
}

}  // namespace wdro
