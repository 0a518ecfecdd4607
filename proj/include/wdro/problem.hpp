#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/geometry.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp.hpp"

namespace wdro {

using Dataset = std::vector<Vector>;

/// ℓ_k(ξ) = ⟨a, ξ⟩ + b
struct AffinePiece {
  Vector a;
  double b = 0.0;

  double operator()(std::span<const double> xi) const { return dot(a, xi) + b; }
  friend bool operator==(const AffinePiece&, const AffinePiece&) = default;
};

enum class Composition { Max, Min };

struct PiecewiseAffineLoss {
  std::vector<AffinePiece> pieces;
  Composition composition = Composition::Max;

  std::size_t dim() const { return pieces.empty() ? 0 : pieces.front().a.size(); }

  double operator()(std::span<const double> xi) const {
    double v = pieces.front()(xi);
    for (std::size_t k = 1; k < pieces.size(); ++k)
      v = composition == Composition::Max ? std::max(v, pieces[k](xi)) : std::min(v, pieces[k](xi));
    return v;
  }

  /// max_k ‖a_k‖_*
  double kappa(GroundNorm n) const {
    double k = 0.0;
    for (const auto& p : pieces) k = std::max(k, dual_norm_value(p.a, n));
    return k;
  }

  void validate(std::size_t m) const {
    if (pieces.empty()) fail(ErrorKind::InvalidConfig, "loss needs at least one piece");
    for (const auto& p : pieces) {
      if (p.a.size() != m)
        fail(ErrorKind::DimensionMismatch,
             "piece slope has length " + std::to_string(p.a.size()) + ", expected " + std::to_string(m));
      for (double v : p.a)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidConfig, "non-finite piece slope");
      if (!std::isfinite(p.b)) fail(ErrorKind::InvalidConfig, "non-finite piece intercept");
    }
  }

  /// Copy with repeated (a_k, b_k) removed, first occurrence kept.
  PiecewiseAffineLoss deduplicated() const {
    PiecewiseAffineLoss out{{}, composition};
    for (const auto& p : pieces)
      if (std::find(out.pieces.begin(), out.pieces.end(), p) == out.pieces.end()) out.pieces.push_back(p);
    return out;
  }

  friend bool operator==(const PiecewiseAffineLoss&, const PiecewiseAffineLoss&) = default;
};

/// Worst: sup Q[ξ ∉ {Aξ < b}].  Best: sup Q[ξ ∈ {Aξ ≤ b}].
enum class UqKind { Worst, Best };

struct UqSet {
  Matrix A;
  Vector b;
  UqKind kind = UqKind::Best;

  /// Loss value at ξ: indicator of the unsafe event (Worst) or the safe event (Best).
  double operator()(std::span<const double> xi) const {
    if (kind == UqKind::Worst) {
      for (std::size_t k = 0; k < b.size(); ++k)
        if (dot(A.row(k), xi) >= b[k]) return 1.0;
      return 0.0;
    }
    for (std::size_t k = 0; k < b.size(); ++k)
      if (dot(A.row(k), xi) > b[k]) return 0.0;
    return 1.0;
  }

  void validate(std::size_t m) const {
    if (A.rows() != b.size()) fail(ErrorKind::DimensionMismatch, "UQ set: A and b disagree");
    if (A.rows() == 0) fail(ErrorKind::InvalidConfig, "UQ set needs at least one row");
    if (A.cols() != m) fail(ErrorKind::DimensionMismatch, "UQ set: A has wrong column count");
  }

  friend bool operator==(const UqSet&, const UqSet&) = default;
};

enum class TwoStageVariant { ObjectiveUncertainty, RhsUncertainty };

/// ObjectiveUncertainty: ℓ(ξ) = min{⟨y, Qξ⟩ : Wy ≥ h}.  RhsUncertainty: ℓ(ξ) = min{⟨q, y⟩ : Wy ≥ Hξ + h}.
struct TwoStageSpec {
  TwoStageVariant variant = TwoStageVariant::ObjectiveUncertainty;
  Matrix Q;
  Matrix W;
  Vector h;
  Matrix H;
  Vector q;

  void validate(std::size_t m) const {
    if (W.rows() != h.size()) fail(ErrorKind::DimensionMismatch, "two-stage: W and h disagree");
    if (variant == TwoStageVariant::ObjectiveUncertainty) {
      if (Q.rows() != W.cols()) fail(ErrorKind::DimensionMismatch, "two-stage: Q rows must equal W columns");
      if (Q.cols() != m) fail(ErrorKind::DimensionMismatch, "two-stage: Q columns must equal sample dimension");
    } else {
      if (H.rows() != W.rows() || H.cols() != m) fail(ErrorKind::DimensionMismatch, "two-stage: H has wrong shape");
      if (q.size() != W.cols()) fail(ErrorKind::DimensionMismatch, "two-stage: q length must equal W columns");
    }
  }

  friend bool operator==(const TwoStageSpec&, const TwoStageSpec&) = default;
};

struct Stage {
  PiecewiseAffineLoss loss;
  Polytope support;

  friend bool operator==(const Stage&, const Stage&) = default;
};

/// ℓ(ξ) = Σ_t max_k ⟨a_tk, ξ_t⟩ + b_tk over consecutive blocks ξ_t of the sample.
struct SeparableLoss {
  std::vector<Stage> stages;

  std::size_t dim() const {
    std::size_t m = 0;
    for (const auto& s : stages) m += s.support.m;
    return m;
  }

  std::size_t offset(std::size_t t) const {
    std::size_t o = 0;
    for (std::size_t s = 0; s < t; ++s) o += stages[s].support.m;
    return o;
  }

  double operator()(std::span<const double> xi) const {
    double v = 0.0;
    for (std::size_t t = 0; t < stages.size(); ++t) v += stages[t].loss(xi.subspan(offset(t), stages[t].support.m));
    return v;
  }

  Polytope support() const {
    std::vector<Polytope> parts;
    for (const auto& s : stages) parts.push_back(s.support);
    return product(parts);
  }

  void validate() const {
    if (stages.empty()) fail(ErrorKind::InvalidConfig, "separable loss needs at least one stage");
    for (const auto& s : stages) {
      s.support.validate();
      s.loss.validate(s.support.m);
      if (s.loss.composition != Composition::Max)
        fail(ErrorKind::InvalidConfig, "separable stages must use max composition");
    }
  }

  friend bool operator==(const SeparableLoss&, const SeparableLoss&) = default;
};

using Loss = std::variant<PiecewiseAffineLoss, UqSet, TwoStageSpec, SeparableLoss>;

struct DroProblem {
  Dataset samples;
  Polytope support;
  double radius = 0.0;
  GroundNorm norm = GroundNorm::One;
  Loss loss;

  std::size_t size() const { return samples.size(); }
  std::size_t dim() const { return samples.empty() ? 0 : samples.front().size(); }

  /// Support actually in force: the stage product for separable losses.
  Polytope effective_support() const {
    if (const auto* sep = std::get_if<SeparableLoss>(&loss)) return sep->support();
    return support;
  }
};

/// Checks the problem invariants and projects samples lying within feas_tol outside Ξ.
/// Larger violations raise SampleOutsideSupport; projections are reported in `warnings`.
inline DroProblem validated(const DroProblem& p, std::vector<std::string>* warnings = nullptr,
                            const SolverConfig& cfg = {}) {
  if (p.samples.empty()) fail(ErrorKind::DatasetTooSmall, "at least one sample is required");
  if (!std::isfinite(p.radius) || p.radius < 0.0) fail(ErrorKind::InvalidConfig, "radius must be finite and >= 0");
  const std::size_t m = p.dim();
  for (const auto& s : p.samples) {
    if (s.size() != m) fail(ErrorKind::DimensionMismatch, "samples have inconsistent dimensions");
    for (double v : s)
      if (!std::isfinite(v)) fail(ErrorKind::InvalidConfig, "non-finite sample entry");
  }
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, SeparableLoss>) {
          l.validate();
          if (l.dim() != m) fail(ErrorKind::DimensionMismatch, "stage dimensions do not add up to the sample dimension");
        } else {
          l.validate(m);
        }
      },
      p.loss);

  DroProblem out = p;
  const Polytope xi = p.effective_support();
  if (!std::holds_alternative<SeparableLoss>(p.loss)) {
    xi.validate();
    if (xi.m != m) fail(ErrorKind::DimensionMismatch, "support dimension differs from sample dimension");
  }
  if (const auto* sep = std::get_if<SeparableLoss>(&p.loss)) {
    for (const auto& s : sep->stages) require_nonempty(s.support, cfg);
  } else {
    require_nonempty(xi, cfg);
  }
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double viol = xi.violation(out.samples[i]);
    if (viol <= 0.0) continue;
    if (viol > cfg.feas_tol)
      fail(ErrorKind::SampleOutsideSupport,
           "sample " + std::to_string(i) + " violates the support by " + detail::fmt_num(viol));
    out.samples[i] = project(xi, out.samples[i], p.norm, cfg);
    if (warnings) warnings->push_back("sample " + std::to_string(i) + " projected onto the support");
  }
  return out;
}

}  // namespace wdro
