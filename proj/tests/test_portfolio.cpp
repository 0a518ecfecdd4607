#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "wdro/experiments.hpp"

using namespace wdro;

namespace {

Dataset market_data(std::size_t n, std::uint64_t seed, const MarketModel& mk = {}) {
  std::mt19937_64 rng(seed);
  return mk.sample(n, rng);
}

Polytope shifted_orthant(std::size_t m) {
  Polytope p{Matrix(0, m), {}, m};
  for (std::size_t j = 0; j < m; ++j) {
    Vector r(m, 0.0);
    r[j] = -1.0;
    p.add_row(r, 1.0);
  }
  return p;
}

// Sample mean-CVaR program in its textbook form: min mean(L) + ρ(τ + Σu_i/(αN)), u_i ≥ L_i − τ.
double rockafellar_uryasev(const Dataset& data, double rho, double alpha, Vector* x_out = nullptr) {
  const std::size_t m = data.front().size(), n = data.size();
  LinearProgram lp;
  for (std::size_t j = 0; j < m; ++j) {
    double c = 0.0;
    for (const auto& xi : data) c -= xi[j] / static_cast<double>(n);
    lp.add_variable(c);
  }
  const std::size_t tau = lp.add_variable(rho, -kInf, kInf);
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(rho / (alpha * static_cast<double>(n)));
  Vector sum(lp.num_variables(), 0.0);
  for (std::size_t j = 0; j < m; ++j) sum[j] = 1.0;
  lp.add_constraint(sum, Relation::Equal, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vector r(lp.num_variables(), 0.0);
    for (std::size_t j = 0; j < m; ++j) r[j] = -data[i][j];
    r[tau] = -1.0;
    r[tau + 1 + i] = -1.0;
    lp.add_constraint(r, Relation::LessEqual, 0.0);
  }
  const auto sol = solve_lp(lp);
  EXPECT_TRUE(sol.optimal());
  if (x_out) x_out->assign(sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(m));
  return *sol.objective_value;
}

// CVaR as the average of the worst αN losses with a fractional boundary atom.
double cvar_by_tail(std::vector<double> loss, double alpha) {
  std::sort(loss.begin(), loss.end(), std::greater<>());
  const double k = alpha * static_cast<double>(loss.size());
  double acc = 0.0, left = k;
  for (double l : loss) {
    const double take = std::min(1.0, left);
    if (take <= 0.0) break;
    acc += take * l;
    left -= take;
  }
  return acc / k;
}

double max_dev_from_equal(const Vector& x) {
  double d = 0.0;
  for (double v : x) d = std::max(d, std::abs(v - 1.0 / static_cast<double>(x.size())));
  return d;
}

}  // namespace

TEST(Portfolio, PieceCoefficients) {
  const PortfolioSpec s;
  const auto p = s.pieces();
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[0].first, -1.0);
  EXPECT_DOUBLE_EQ(p[0].second, 10.0);
  EXPECT_DOUBLE_EQ(p[1].first, -51.0);
  EXPECT_DOUBLE_EQ(p[1].second, -40.0);
}

TEST(Portfolio, SpecValidation) {
  PortfolioSpec s;
  s.alpha = 0.0;
  EXPECT_THROW(s.validate(), Error);
  s.alpha = 1.5;
  EXPECT_THROW(s.validate(), Error);
  s = PortfolioSpec{};
  s.rho = -1.0;
  EXPECT_THROW(s.validate(), Error);
  s = PortfolioSpec{};
  s.support = Polytope::whole_space(3);
  EXPECT_THROW(s.validate(), Error);
}

TEST(Portfolio, ZeroRadiusMatchesSampleProgram) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = market_data(25, seed);
    const auto s = solve_portfolio(PortfolioSpec{}, data, 0.0);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.certificate, rockafellar_uryasev(data, 10.0, 0.2), 1e-8);
    EXPECT_NEAR(empirical_mean_cvar(s.x, data, 10.0, 0.2), s.certificate, 1e-8);
  }
}

TEST(Portfolio, WeightsStayInSimplex) {
  const auto data = market_data(40, 11);
  for (double eps : {0.0, 1e-3, 1e-2, 0.1, 1.0}) {
    const auto s = solve_portfolio(PortfolioSpec{}, data, eps);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    double sum = 0.0;
    for (double v : s.x) {
      EXPECT_GE(v, -1e-9);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Portfolio, CertificateNondecreasingInRadius) {
  const auto data = market_data(30, 12);
  double prev = -kInf;
  for (double eps : default_sweep_grid()) {
    const auto s = solve_portfolio(PortfolioSpec{}, data, eps);
    EXPECT_GE(s.certificate, prev - 1e-9);
    prev = s.certificate;
  }
}

TEST(Portfolio, CertificateIsWorstCaseOfChosenPortfolio) {
  const auto data = market_data(20, 13);
  const double eps = 0.05;
  const auto s = solve_portfolio(PortfolioSpec{}, data, eps);
  PiecewiseAffineLoss loss{{}, Composition::Max};
  for (const auto& [a, b] : PortfolioSpec{}.pieces()) {
    Vector g(s.x.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = a * s.x[j];
    loss.pieces.push_back({g, b * s.tau});
  }
  const auto wc = worst_case_value(DroProblem{data, Polytope::whole_space(10), eps, GroundNorm::One, loss});
  EXPECT_NEAR(wc.value, s.certificate, 1e-8);
}

TEST(Portfolio, LargeRadiusGivesEqualWeightsOnWholeSpace) {
  const auto s = solve_portfolio(PortfolioSpec{}, market_data(30, 21), 10.0);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_LE(max_dev_from_equal(s.x), 1e-4);
}

TEST(Portfolio, LargeRadiusGivesEqualWeightsOnShiftedOrthant) {
  PortfolioSpec spec;
  spec.support = shifted_orthant(10);
  const auto s = solve_portfolio(spec, market_data(30, 22), 10.0);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_LE(max_dev_from_equal(s.x), 1e-4);
}

TEST(Portfolio, RejectsSamplesOutsideSupport) {
  PortfolioSpec spec;
  spec.support = shifted_orthant(10);
  Dataset data{Vector(10, 0.0)};
  data[0][3] = -2.0;
  EXPECT_THROW(build_portfolio_dro(spec, data, 0.1), Error);
}

TEST(Portfolio, EmpiricalMeanCvarMatchesTailAverage) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {1, 7, 10, 33}) {
    Dataset data(n, Vector(3));
    for (auto& xi : data)
      for (auto& v : xi) v = u(rng) - 0.4;
    const Vector x{0.2, 0.5, 0.3};
    std::vector<double> loss;
    for (const auto& xi : data) loss.push_back(-dot(x, xi));
    for (double alpha : {0.1, 0.2, 0.5, 1.0}) {
      const double mean = std::accumulate(loss.begin(), loss.end(), 0.0) / static_cast<double>(n);
      EXPECT_NEAR(empirical_mean_cvar(x, data, 3.0, alpha), mean + 3.0 * cvar_by_tail(loss, alpha), 1e-12);
    }
  }
}

TEST(OutOfSample, RiskNeutralAndFullLevel) {
  const MarketModel mk;
  const Vector x{0.0, 0.1, 0.2, 0.0, 0.0, 0.3, 0.0, 0.0, 0.4, 0.0};
  const double mu_l = -dot(x, mk.mean());
  PortfolioSpec spec;
  spec.rho = 0.0;
  EXPECT_NEAR(out_of_sample_objective(x, spec, mk), mu_l, 1e-15);
  spec.rho = 10.0;
  spec.alpha = 1.0;
  EXPECT_NEAR(out_of_sample_objective(x, spec, mk), 11.0 * mu_l, 1e-14);
}

TEST(OutOfSample, MatchesMonteCarlo) {
  const MarketModel mk;
  const PortfolioSpec spec;
  std::mt19937_64 rng(99);
  std::gamma_distribution<double> g(1.0, 1.0);
  Vector x(10);
  double s = 0.0;
  for (auto& v : x) s += v = g(rng);
  for (auto& v : x) v /= s;
  // Analytic VaR makes h_i = L_i + ρ(τ* + (L_i − τ*)_+/α) an unbiased sample of J(x).
  const Vector mu = mk.mean();
  const double mu_l = -dot(x, mu);
  const double sd_l = std::sqrt(dot(x, multiply(mk.covariance(), x)));
  const boost::math::normal_distribution<double> z;
  const double tau = mu_l + sd_l * boost::math::quantile(z, 1.0 - spec.alpha);
  const std::size_t n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  std::normal_distribution<double> nz(0.0, 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double psi = mk.systematic_sd() * nz(rng);
    double l = 0.0;
    for (std::size_t i = 0; i < 10; ++i) l -= x[i] * (psi + mu[i] + mk.idiosyncratic_sd(i) * nz(rng));
    const double h = l + spec.rho * (tau + std::max(0.0, l - tau) / spec.alpha);
    sum += h;
    sum2 += h * h;
  }
  const double mean = sum / static_cast<double>(n);
  const double se = std::sqrt((sum2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
  EXPECT_LE(std::abs(mean - out_of_sample_objective(x, spec, mk)), 3.0 * se);
}

TEST(Market, MomentsAndInterpretation) {
  MarketModel mk;
  EXPECT_DOUBLE_EQ(mk.mean()[0], 0.03);
  EXPECT_DOUBLE_EQ(mk.mean()[9], 0.3);
  EXPECT_DOUBLE_EQ(mk.idiosyncratic_sd(9), 0.25);
  EXPECT_DOUBLE_EQ(mk.covariance()(0, 1), 0.0004);
  EXPECT_DOUBLE_EQ(mk.covariance()(2, 2), 0.0004 + 0.075 * 0.075);
  mk.scale_interpretation = ScaleInterpretation::Variance;
  EXPECT_DOUBLE_EQ(mk.systematic_sd(), std::sqrt(0.02));
  EXPECT_DOUBLE_EQ(mk.covariance()(0, 1), 0.02);
  EXPECT_NEAR(mk.covariance()(9, 9), 0.02 + 0.25, 1e-15);
}

TEST(Market, SampleMomentsMatchModel) {
  const MarketModel mk;
  const auto data = market_data(200000, 3, mk);
  const Vector mu = mk.mean();
  const Matrix cov = mk.covariance();
  for (std::size_t i : {0, 4, 9}) {
    double s = 0.0;
    for (const auto& xi : data) s += xi[i];
    s /= static_cast<double>(data.size());
    EXPECT_NEAR(s, mu[i], 4.0 * std::sqrt(cov(i, i) / static_cast<double>(data.size())));
  }
  double c = 0.0;
  for (const auto& xi : data) c += (xi[1] - mu[1]) * (xi[7] - mu[7]);
  c /= static_cast<double>(data.size());
  const double se = std::sqrt((cov(1, 1) * cov(7, 7) + cov(1, 7) * cov(1, 7)) / static_cast<double>(data.size()));
  EXPECT_NEAR(c, cov(1, 7), 4.0 * se);
}

TEST(Market, ValidateRejectsBadScales) {
  MarketModel mk;
  mk.systematic_scale = 0.0;
  EXPECT_THROW(mk.validate(), Error);
}

TEST(Seeds, SplitMixKnownValuesAndSeparation) {
  // Reference outputs of the SplitMix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(0x9e3779b97f4a7c15ULL), 0x6e789e6aa1b965f4ULL);
  EXPECT_NE(derive_seed(1, 30, 0), derive_seed(1, 30, 1));
  EXPECT_NE(derive_seed(1, 30, 0), derive_seed(1, 300, 0));
  EXPECT_NE(derive_seed(1, 30, 0), derive_seed(2, 30, 0));
  EXPECT_EQ(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
}

TEST(Orthant, IndependentComponents) {
  Matrix cov(3, 3);
  cov(0, 0) = 1.0;
  cov(1, 1) = 4.0;
  cov(2, 2) = 0.25;
  const Vector mean{0.3, -1.0, 0.2};
  double expect = 1.0;
  for (std::size_t i = 0; i < 3; ++i) expect *= oracle::phi_cdf(-mean[i] / std::sqrt(cov(i, i)));
  EXPECT_NEAR(gaussian_orthant_probability(mean, cov), expect, 1e-9);
}

TEST(Orthant, BivariateCentered) {
  for (double r : {-0.9, -0.3, 0.0, 0.5, 0.95}) {
    Matrix cov(2, 2);
    cov(0, 0) = cov(1, 1) = 1.0;
    cov(0, 1) = cov(1, 0) = r;
    EXPECT_NEAR(gaussian_orthant_probability({0.0, 0.0}, cov), 0.25 + std::asin(r) / (2.0 * std::numbers::pi), 1e-9);
  }
}

TEST(Orthant, TrivariateCentered) {
  const double r12 = 0.3, r13 = -0.2, r23 = 0.6;
  Matrix cov(3, 3);
  for (std::size_t i = 0; i < 3; ++i) cov(i, i) = 2.0;
  cov(0, 1) = cov(1, 0) = 2.0 * r12;
  cov(0, 2) = cov(2, 0) = 2.0 * r13;
  cov(1, 2) = cov(2, 1) = 2.0 * r23;
  const double expect = 0.125 + (std::asin(r12) + std::asin(r13) + std::asin(r23)) / (4.0 * std::numbers::pi);
  EXPECT_NEAR(gaussian_orthant_probability({0.0, 0.0, 0.0}, cov), expect, 1e-9);
}

TEST(Orthant, DegenerateDirections) {
  Matrix cov(2, 2);
  cov(0, 0) = 1.0;
  EXPECT_NEAR(gaussian_orthant_probability({0.5, -1.0}, cov), oracle::phi_cdf(-0.5), 1e-12);
  EXPECT_DOUBLE_EQ(gaussian_orthant_probability({0.5, 1.0}, cov), 0.0);
  // Perfectly correlated pair: P[Y ≤ 0, Y + 0.1 ≤ 0] = Φ(−0.1). The integrand jumps, so only 1e-6 is asked.
  Matrix c2(2, 2, 1.0);
  EXPECT_NEAR(gaussian_orthant_probability({0.0, 0.1}, c2), oracle::phi_cdf(-0.1), 1e-6);
}

TEST(Orthant, OutperformanceEventMatchesMonteCarlo) {
  const MarketModel mk;
  Vector x(10, 0.0);
  x[4] = 0.5;
  x[9] = 0.5;
  const UqSet ev = outperformance_set(x, {7, 8, 9});
  const double p = gaussian_probability(ev, mk);
  const auto data = market_data(400000, 17, mk);
  double hits = 0.0;
  for (const auto& xi : data) hits += ev(xi);
  const double phat = hits / static_cast<double>(data.size());
  EXPECT_NEAR(phat, p, 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(data.size())) + 1e-6);
}
