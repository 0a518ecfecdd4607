#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wdro/errors.hpp"
#include "wdro/linalg.hpp"
#include "wdro/problem.hpp"
#include "wdro/reformulate.hpp"

namespace wdro {

/// Constants of the light-tailed measure concentration bound.
struct ConcentrationConfig {
  double c1 = 1.0;
  double c2 = 1.0;
  double a = 2.0;
  std::size_t m = 1;

  void validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2))
      fail(ErrorKind::InvalidConfig, "c1 and c2 must be finite and positive");
    if (!(a > 1.0) || !std::isfinite(a)) fail(ErrorKind::InvalidConfig, "tail exponent a must exceed 1");
    if (m == 0) fail(ErrorKind::InvalidConfig, "dimension must be positive");
  }
};

/// Radius whose ball contains the true distribution with confidence 1 − β.
inline double radius_a_priori(std::size_t n, double beta, const ConcentrationConfig& cfg) {
  cfg.validate();
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::InvalidBeta, "beta must lie in (0, 1)");
  if (n == 0) fail(ErrorKind::DatasetTooSmall, "N must be at least 1");
  const double l = std::log(cfg.c1 / beta);
  const double nn = static_cast<double>(n);
  const double base = l / (cfg.c2 * nn);
  if (base <= 0.0) return 0.0;
  const double exponent =
      nn >= l / cfg.c2 ? 1.0 / static_cast<double>(std::max<std::size_t>(cfg.m, 2)) : 1.0 / cfg.a;
  return std::pow(base, exponent);
}

/// n points spaced evenly in log scale from lo to hi.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// 30 log-spaced radii in [1e−4, 1].
inline std::vector<double> default_grid() { return log_grid(1e-4, 1.0, 30); }

/// A data-driven decision: trained decision vector and its in-sample certificate.
struct Candidate {
  Vector decision;
  double certificate = kInf;
};

/// Training and validation hooks used by the data-driven calibration procedures.
struct DecisionProblem {
  std::function<Candidate(const Dataset& train, double epsilon)> train;
  /// Sample-average estimate of the objective of `c` on `validation`; lower is better.
  std::function<double(const Candidate& c, const Dataset& validation)> score;
};

enum class CalibrationMethod { APriori, Holdout, KFoldCV, UqKFoldCV };

constexpr const char* to_string(CalibrationMethod m) {
  switch (m) {
    case CalibrationMethod::APriori: return "a_priori";
    case CalibrationMethod::Holdout: return "holdout";
    case CalibrationMethod::KFoldCV: return "kfold";
    case CalibrationMethod::UqKFoldCV: return "uq_kfold";
  }
  return "?";
}

struct GridScore {
  double epsilon = 0.0;
  double score = 0.0;
};

struct CalibrationResult {
  double radius = 0.0;
  CalibrationMethod method = CalibrationMethod::Holdout;
  /// Validation scores per candidate (holdout) or averaged over folds (k-fold).
  std::vector<GridScore> table;
  /// Radius selected in each fold (k-fold methods).
  std::vector<double> fold_radii;
  /// Sample order after the seeded shuffle; folds are contiguous blocks of it.
  std::vector<std::size_t> permutation;
  std::size_t folds = 0;
  double split = 0.0;
  std::uint64_t seed = 0;
  Candidate solution;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorKind::GridEmpty, "candidate grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) fail(ErrorKind::InvalidConfig, "grid radii must be finite and >= 0");
    if (i > 0 && grid[i] <= grid[i - 1]) fail(ErrorKind::InvalidConfig, "grid must be strictly increasing");
  }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline Dataset pick(const Dataset& data, const std::vector<std::size_t>& order, std::size_t from, std::size_t to) {
  Dataset out;
  for (std::size_t i = from; i < to; ++i) out.push_back(data[order[i]]);
  return out;
}

/// Boundaries of k contiguous blocks of nearly equal size.
inline std::vector<std::size_t> fold_bounds(std::size_t n, std::size_t k) {
  std::vector<std::size_t> b(k + 1, 0);
  for (std::size_t f = 0; f <= k; ++f) b[f] = f * n / k;
  return b;
}

/// Scores every grid radius; returns the index of the smallest minimizer.
inline std::size_t select(const DecisionProblem& dp, const Dataset& train, const Dataset& valid,
                          const std::vector<double>& grid, std::vector<double>& scores) {
  scores.assign(grid.size(), kInf);
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    scores[g] = dp.score(dp.train(train, grid[g]), valid);
    if (scores[g] < scores[best]) best = g;
  }
  return best;
}

}  // namespace detail

/// Holdout: train on a `split` fraction of the shuffled data, pick the radius with the best validation score.
inline CalibrationResult calibrate_holdout(const Dataset& data, const DecisionProblem& dp,
                                           const std::vector<double>& grid, double split, std::uint64_t seed) {
  detail::check_grid(grid);
  if (!(split > 0.0 && split < 1.0)) fail(ErrorKind::InvalidConfig, "split must lie in (0, 1)");
  const std::size_t n = data.size();
  const auto nt = static_cast<std::size_t>(std::llround(split * static_cast<double>(n)));
  if (nt < 1 || nt >= n) fail(ErrorKind::DatasetTooSmall, "holdout needs at least one training and one validation sample");
  CalibrationResult r;
  r.method = CalibrationMethod::Holdout;
  r.split = split;
  r.seed = seed;
  r.permutation = detail::shuffled_indices(n, seed);
  const Dataset train = detail::pick(data, r.permutation, 0, nt);
  const Dataset valid = detail::pick(data, r.permutation, nt, n);
  std::vector<double> scores;
  const std::size_t best = detail::select(dp, train, valid, grid, scores);
  for (std::size_t g = 0; g < grid.size(); ++g) r.table.push_back({grid[g], scores[g]});
  r.radius = grid[best];
  r.solution = dp.train(train, r.radius);
  return r;
}

/// k-fold cross validation: average the per-fold holdout radii and retrain on all data.
inline CalibrationResult calibrate_kfold(const Dataset& data, const DecisionProblem& dp, const std::vector<double>& grid,
                                         std::size_t k, std::uint64_t seed) {
  detail::check_grid(grid);
  if (k < 2) fail(ErrorKind::InvalidConfig, "k-fold cross validation needs k >= 2");
  const std::size_t n = data.size();
  if (n < k) fail(ErrorKind::DatasetTooSmall, "k-fold cross validation needs at least k samples");
  CalibrationResult r;
  r.method = CalibrationMethod::KFoldCV;
  r.folds = k;
  r.seed = seed;
  r.permutation = detail::shuffled_indices(n, seed);
  const auto b = detail::fold_bounds(n, k);
  std::vector<double> avg(grid.size(), 0.0), scores;
  for (std::size_t f = 0; f < k; ++f) {
    Dataset train = detail::pick(data, r.permutation, 0, b[f]);
    const Dataset tail = detail::pick(data, r.permutation, b[f + 1], n);
    train.insert(train.end(), tail.begin(), tail.end());
    const Dataset valid = detail::pick(data, r.permutation, b[f], b[f + 1]);
    const std::size_t best = detail::select(dp, train, valid, grid, scores);
    r.fold_radii.push_back(grid[best]);
    for (std::size_t g = 0; g < grid.size(); ++g) avg[g] += scores[g] / static_cast<double>(k);
  }
  for (std::size_t g = 0; g < grid.size(); ++g) r.table.push_back({grid[g], avg[g]});
  r.radius = std::accumulate(r.fold_radii.begin(), r.fold_radii.end(), 0.0) / static_cast<double>(k);
  r.solution = dp.train(data, r.radius);
  return r;
}

struct UqBounds {
  CalibrationResult upper;
  CalibrationResult lower;
  /// Ĵ⁺ and Ĵ⁻ on all data at the averaged radii.
  double upper_value = 1.0;
  double lower_value = 0.0;
};

/// sup over the ball of Q[ξ ∈ A] for A = {Aξ ≤ b}.
inline double uq_upper_bound(const Dataset& data, const Polytope& support, GroundNorm norm, const UqSet& safe,
                             double epsilon, const SolverConfig& cfg = {}) {
  UqSet s = safe;
  s.kind = UqKind::Best;
  return worst_case_value(DroProblem{data, support, epsilon, norm, s}, cfg).value;
}

/// 1 − sup over the ball of Q[ξ ∉ int A].
inline double uq_lower_bound(const Dataset& data, const Polytope& support, GroundNorm norm, const UqSet& safe,
                             double epsilon, const SolverConfig& cfg = {}) {
  // Halfspaces of the complement that miss the support carry no mass under any admissible distribution.
  UqSet s{Matrix(0, safe.A.cols()), {}, UqKind::Worst};
  for (std::size_t k = 0; k < safe.b.size(); ++k) {
    const auto row = safe.A.row(k);
    Constraint c{Vector(row.begin(), row.end()), Relation::GreaterEqual, safe.b[k]};
    if (find_point(support, {c}, cfg)) {
      s.A.append_row(row);
      s.b.push_back(safe.b[k]);
    }
  }
  if (s.b.empty()) return 1.0;
  return 1.0 - worst_case_value(DroProblem{data, support, epsilon, norm, s}, cfg).value;
}

namespace detail {

/// Slack for comparing LP bounds against empirical frequencies.
inline constexpr double kCoverTol = 1e-9;

/// Smallest grid index whose bound covers `target`. The bounds are monotone in ε, so bisection suffices.
inline std::size_t smallest_covering(const std::vector<double>& grid, const std::function<bool(double)>& covers) {
  if (!covers(grid.back())) return grid.size();
  std::size_t lo = 0, hi = grid.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (covers(grid[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

inline double empirical_probability(const Dataset& data, const UqSet& safe) {
  UqSet s = safe;
  s.kind = UqKind::Best;
  double c = 0.0;
  for (const auto& x : data) c += s(x);
  return c / static_cast<double>(data.size());
}

}  // namespace detail

/// Per fold: smallest radius whose training bound covers the validation estimate of P[A]; radii averaged over folds.
inline UqBounds calibrate_uq_kfold(const Dataset& data, const Polytope& support, GroundNorm norm, const UqSet& safe,
                                   const std::vector<double>& grid, std::size_t k, std::uint64_t seed,
                                   const SolverConfig& cfg = {}) {
  detail::check_grid(grid);
  if (k < 2) fail(ErrorKind::InvalidConfig, "k-fold cross validation needs k >= 2");
  const std::size_t n = data.size();
  if (n < k) fail(ErrorKind::DatasetTooSmall, "k-fold cross validation needs at least k samples");
  UqBounds out;
  for (auto* r : {&out.upper, &out.lower}) {
    r->method = CalibrationMethod::UqKFoldCV;
    r->folds = k;
    r->seed = seed;
    r->permutation = detail::shuffled_indices(n, seed);
  }
  const auto& perm = out.upper.permutation;
  const auto b = detail::fold_bounds(n, k);
  for (std::size_t f = 0; f < k; ++f) {
    Dataset train = detail::pick(data, perm, 0, b[f]);
    const Dataset tail = detail::pick(data, perm, b[f + 1], n);
    train.insert(train.end(), tail.begin(), tail.end());
    const double target = detail::empirical_probability(detail::pick(data, perm, b[f], b[f + 1]), safe);
    const std::size_t up = detail::smallest_covering(
        grid, [&](double e) { return uq_upper_bound(train, support, norm, safe, e, cfg) >= target - detail::kCoverTol; });
    const std::size_t lo = detail::smallest_covering(
        grid, [&](double e) { return uq_lower_bound(train, support, norm, safe, e, cfg) <= target + detail::kCoverTol; });
    if (up == grid.size() || lo == grid.size())
      fail(ErrorKind::NoCoveringRadius,
           "fold " + std::to_string(f) + ": no candidate radius covers the validation estimate; enlarge the grid");
    out.upper.fold_radii.push_back(grid[up]);
    out.lower.fold_radii.push_back(grid[lo]);
  }
  for (auto* r : {&out.upper, &out.lower})
    r->radius = std::accumulate(r->fold_radii.begin(), r->fold_radii.end(), 0.0) / static_cast<double>(k);
  out.upper_value = uq_upper_bound(data, support, norm, safe, out.upper.radius, cfg);
  out.lower_value = uq_lower_bound(data, support, norm, safe, out.lower.radius, cfg);
  out.upper.solution.certificate = out.upper_value;
  out.lower.solution.certificate = out.lower_value;
  return out;
}

}  // namespace wdro
