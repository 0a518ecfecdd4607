#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "wdro/builder.hpp"
#include "wdro/errors.hpp"
#include "wdro/geometry.hpp"
#include "wdro/market.hpp"
#include "wdro/problem.hpp"
#include "wdro/reformulate.hpp"

namespace wdro {

/// Mean-CVaR investor: minimize E[−⟨x, ξ⟩] + ρ·CVaR_α(−⟨x, ξ⟩) over the probability simplex.
struct PortfolioSpec {
  std::size_t m = 10;
  double rho = 10.0;
  double alpha = 0.2;
  Polytope support = Polytope::whole_space(10);
  GroundNorm ground_norm = GroundNorm::One;

  void validate() const {
    if (m == 0) fail(ErrorKind::InvalidConfig, "portfolio needs at least one asset");
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidConfig, "alpha must lie in (0, 1]");
    if (!(rho >= 0.0) || !std::isfinite(rho)) fail(ErrorKind::InvalidConfig, "rho must be finite and >= 0");
    support.validate();
    if (support.m != m) fail(ErrorKind::DimensionMismatch, "portfolio support dimension differs from m");
  }

  /// Scalar coefficients (a_k, b_k) of the loss max_k a_k⟨x, ξ⟩ + b_k τ.
  std::vector<std::pair<double, double>> pieces() const {
    return {{-1.0, rho}, {-1.0 - rho / alpha, rho * (1.0 - 1.0 / alpha)}};
  }
};

struct PortfolioModel {
  LinearProgram lp;
  std::vector<std::size_t> x;
  std::size_t tau = 0;
  std::size_t lambda = 0;
};

struct PortfolioSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double tau = 0.0;
  /// Optimal value Ĵ_N(ε).
  double certificate = kInf;
};

/// Joint LP in (x, τ, λ, s_i, γ_ik) whose optimum is the worst-case mean-CVaR.
inline PortfolioModel build_portfolio_dro(const PortfolioSpec& spec, const Dataset& data, double epsilon,
                                          const BuildOptions& opts = {}) {
  spec.validate();
  if (data.empty()) fail(ErrorKind::DatasetTooSmall, "portfolio needs at least one sample");
  if (!std::isfinite(epsilon) || epsilon < 0.0) fail(ErrorKind::InvalidConfig, "radius must be finite and >= 0");
  for (const auto& xi : data) {
    if (xi.size() != spec.m) fail(ErrorKind::DimensionMismatch, "sample dimension differs from asset count");
    if (!spec.support.contains(xi, 1e-9)) fail(ErrorKind::SampleOutsideSupport, "sample outside the support");
  }
  LpBuilder bld(Sense::Minimize, opts);
  PortfolioModel out;
  LinExpr budget;
  for (std::size_t j = 0; j < spec.m; ++j) {
    out.x.push_back(bld.var(0.0, 0.0, kInf, detail::idx("x", j)));
    budget.add(out.x.back(), 1.0);
  }
  bld.row(budget, Relation::Equal, 1.0);
  out.tau = bld.var(0.0, -kInf, kInf, "tau");
  out.lambda = bld.var(epsilon, 0.0, kInf, "lambda");

  std::vector<detail::SymbolicPiece> pieces;
  for (const auto& [a, b] : spec.pieces()) {
    detail::SymbolicPiece sp;
    for (std::size_t j = 0; j < spec.m; ++j) sp.a.push_back(LinExpr::var(out.x[j], a));
    sp.b = LinExpr::var(out.tau, b);
    pieces.push_back(std::move(sp));
  }
  detail::emit_max_affine(bld, data, spec.support, spec.ground_norm, pieces, out.lambda,
                          1.0 / static_cast<double>(data.size()));
  out.lp = std::move(bld).build();
  return out;
}

inline PortfolioSolution solve_portfolio(const PortfolioSpec& spec, const Dataset& data, double epsilon,
                                         const SolverConfig& cfg = {}, const BuildOptions& opts = {}) {
  const auto model = build_portfolio_dro(spec, data, epsilon, opts);
  const auto sol = solve_lp(model.lp, cfg);
  PortfolioSolution r;
  r.status = sol.status;
  if (!sol.optimal()) return r;
  for (std::size_t j : model.x) r.x.push_back(sol.primal[j]);
  r.tau = sol.primal[model.tau];
  r.certificate = *sol.objective_value;
  return r;
}

/// Empirical mean-CVaR of portfolio x on `data`; the CVaR is the exact minimum over τ.
inline double empirical_mean_cvar(std::span<const double> x, const Dataset& data, double rho, double alpha) {
  if (data.empty()) fail(ErrorKind::DatasetTooSmall, "empty validation set");
  const double n = static_cast<double>(data.size());
  std::vector<double> loss;
  loss.reserve(data.size());
  for (const auto& xi : data) loss.push_back(-dot(x, xi));
  std::sort(loss.begin(), loss.end(), std::greater<>());
  const double mean = std::accumulate(loss.begin(), loss.end(), 0.0) / n;
  // min over τ ∈ {L_(j)} of τ + (1/(αN)) Σ_{i<j} (L_(i) − τ)
  double best = kInf, prefix = 0.0;
  for (std::size_t j = 0; j < loss.size(); ++j) {
    const double tau = loss[j];
    best = std::min(best, tau + (prefix - static_cast<double>(j) * tau) / (alpha * n));
    prefix += loss[j];
  }
  return mean + rho * best;
}

/// J(x) = μ_L + ρ(μ_L + σ_L φ(Φ⁻¹(1−α))/α) for the Gaussian loss L = −⟨x, ξ⟩.
inline double out_of_sample_objective(std::span<const double> x, const PortfolioSpec& spec, const MarketModel& market) {
  if (x.size() != market.m) fail(ErrorKind::DimensionMismatch, "portfolio and market dimensions differ");
  const double mu_l = -dot(x, market.mean());
  const double sigma_l = std::sqrt(std::max(0.0, dot(x, multiply(market.covariance(), x))));
  const boost::math::normal_distribution<double> z;
  const double tail = spec.alpha >= 1.0 ? 0.0 : boost::math::pdf(z, boost::math::quantile(z, 1.0 - spec.alpha)) / spec.alpha;
  return mu_l + spec.rho * (mu_l + sigma_l * tail);
}

}  // namespace wdro
