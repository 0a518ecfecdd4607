#include <gtest/gtest.h>

#include <random>

#include "wdro/wasserstein.hpp"

using namespace wdro;

namespace {

DiscreteDistribution dirac(Vector x) { return {{{std::move(x), 1.0}}}; }

DiscreteDistribution uniform(const std::vector<Vector>& pts) { return DiscreteDistribution::empirical(pts); }

DiscreteDistribution random_distribution(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.1, 1.0);
  DiscreteDistribution d;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Atom a{Vector(m), w(rng)};
    for (auto& v : a.point) v = u(rng);
    total += a.weight;
    d.atoms.push_back(std::move(a));
  }
  for (auto& a : d.atoms) a.weight /= total;
  return d;
}

// W1 on the line equals the integral of |F_P − F_Q|.
double cdf_distance(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  std::vector<std::pair<double, double>> events;
  for (const auto& a : p.atoms) events.emplace_back(a.point[0], a.weight);
  for (const auto& a : q.atoms) events.emplace_back(a.point[0], -a.weight);
  std::sort(events.begin(), events.end());
  double diff = 0.0, total = 0.0;
  for (std::size_t e = 0; e + 1 < events.size(); ++e) {
    diff += events[e].second;
    total += std::abs(diff) * (events[e + 1].first - events[e].first);
  }
  return total;
}

}  // namespace

TEST(Wasserstein, HandValues) {
  EXPECT_NEAR(wasserstein_distance(dirac({0.0}), dirac({1.0}), GroundNorm::One).distance, 1.0, 1e-12);
  EXPECT_NEAR(wasserstein_distance(uniform({{0.0}, {1.0}}), uniform({{0.0}, {3.0}}), GroundNorm::One).distance, 1.0,
              1e-12);
  const auto p = uniform({{0.0, 1.0}, {2.0, -1.0}});
  EXPECT_NEAR(wasserstein_distance(p, p, GroundNorm::Inf).distance, 0.0, 1e-12);
  EXPECT_NEAR(wasserstein_distance(dirac({0.0, 0.0}), dirac({1.0, -2.0}), GroundNorm::One).distance, 3.0, 1e-12);
  EXPECT_NEAR(wasserstein_distance(dirac({0.0, 0.0}), dirac({1.0, -2.0}), GroundNorm::Inf).distance, 2.0, 1e-12);
}

TEST(Wasserstein, MatchesCdfFormulaOnTheLine) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_distribution(rng, 1 + rng() % 8, 1);
    const auto q = random_distribution(rng, 1 + rng() % 8, 1);
    EXPECT_NEAR(wasserstein_distance(p, q, GroundNorm::One).distance, cdf_distance(p, q), 1e-9);
  }
}

TEST(Wasserstein, MetricAxiomsAndDuality) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 40; ++t) {
    const std::size_t m = 1 + rng() % 3;
    const GroundNorm n = t % 2 ? GroundNorm::One : GroundNorm::Inf;
    const auto p = random_distribution(rng, 1 + rng() % 6, m);
    const auto q = random_distribution(rng, 1 + rng() % 6, m);
    const auto r = random_distribution(rng, 1 + rng() % 6, m);
    const auto pq = wasserstein_distance(p, q, n);
    EXPECT_GE(pq.distance, 0.0);
    EXPECT_NEAR(pq.distance, wasserstein_distance(q, p, n).distance, 1e-9);
    EXPECT_LE(pq.distance, wasserstein_distance(p, r, n).distance + wasserstein_distance(r, q, n).distance + 1e-8);
    EXPECT_NEAR(pq.distance, pq.dual_value, 1e-8);

    auto shuffled = p;
    std::shuffle(shuffled.atoms.begin(), shuffled.atoms.end(), rng);
    EXPECT_LT(wasserstein_distance(p, shuffled, n).distance, 1e-9);
  }
}

TEST(Wasserstein, PlanHasPrescribedMarginals) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_distribution(rng, 2 + rng() % 5, 2);
    const auto q = random_distribution(rng, 2 + rng() % 5, 2);
    const auto r = wasserstein_distance(p, q, GroundNorm::One);
    double cost = 0.0;
    for (std::size_t i = 0; i < r.source.atoms.size(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < r.target.atoms.size(); ++j) {
        EXPECT_GE(r.plan.flow(i, j), 0.0);
        row += r.plan.flow(i, j);
        cost += r.plan.flow(i, j) * norm_value(subtract(r.source.atoms[i].point, r.target.atoms[j].point), GroundNorm::One);
      }
      EXPECT_NEAR(row, r.source.atoms[i].weight, 1e-9);
    }
    for (std::size_t j = 0; j < r.target.atoms.size(); ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < r.source.atoms.size(); ++i) col += r.plan.flow(i, j);
      EXPECT_NEAR(col, r.target.atoms[j].weight, 1e-9);
    }
    EXPECT_NEAR(cost, r.plan.cost, 1e-9);
  }
}

TEST(Wasserstein, DuplicateAtomsMerged) {
  DiscreteDistribution p{{{{0.0}, 0.25}, {{0.0}, 0.25}, {{1.0}, 0.5}}};
  const auto r = wasserstein_distance(p, dirac({0.0}), GroundNorm::One);
  EXPECT_EQ(r.source.atoms.size(), 2u);
  EXPECT_NEAR(r.source.atoms[0].weight, 0.5, 1e-15);
  EXPECT_NEAR(r.distance, 0.5, 1e-12);
}

TEST(Wasserstein, Errors) {
  EXPECT_THROW(wasserstein_distance(dirac({0.0}), dirac({0.0, 1.0}), GroundNorm::One), Error);
  DiscreteDistribution bad{{{{0.0}, 0.5}}};
  EXPECT_THROW(wasserstein_distance(bad, dirac({0.0}), GroundNorm::One), Error);
}

TEST(Wasserstein, ProcessNormCost) {
  const auto cost = process_norm_cost({1, 2}, GroundNorm::Inf);
  EXPECT_NEAR(cost(Vector{0.0, 0.0, 0.0}, Vector{1.0, 2.0, -3.0}), 4.0, 1e-15);
}

TEST(KantorovichRubinstein, HandValues) {
  EXPECT_NEAR(kr_dual_lower_bound(dirac({0.0}), dirac({1.0}), {{1.0}}, GroundNorm::One), 1.0, 1e-15);
  const auto p = uniform({{0.0, 1.0}, {2.0, -1.0}});
  EXPECT_EQ(kr_dual_lower_bound(p, p, {{1.0, 0.0}, {0.0, -1.0}}, GroundNorm::One), 0.0);
}

TEST(KantorovichRubinstein, NeverExceedsDistance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 1 + rng() % 3;
    const GroundNorm n = t % 2 ? GroundNorm::One : GroundNorm::Inf;
    const auto p = random_distribution(rng, 1 + rng() % 5, m);
    const auto q = random_distribution(rng, 1 + rng() % 5, m);
    std::vector<Vector> slopes;
    for (int s = 0; s < 100; ++s) {
      Vector th(m);
      for (auto& v : th) v = g(rng);
      const double scale = dual_norm_value(th, n);
      for (auto& v : th) v /= scale * (1.0 + 1e-15);
      slopes.push_back(th);
    }
    EXPECT_LE(kr_dual_lower_bound(p, q, slopes, n), wasserstein_distance(p, q, n).distance + 1e-9);
  }
}

TEST(KantorovichRubinstein, SteepSlopeRejected) {
  try {
    kr_dual_lower_bound(dirac({0.0, 0.0}), dirac({1.0, 0.0}), {{0.6, 0.6}}, GroundNorm::Inf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SlopeTooLarge);
  }
  EXPECT_NO_THROW(kr_dual_lower_bound(dirac({0.0, 0.0}), dirac({1.0, 0.0}), {{0.6, 0.6}}, GroundNorm::One));
}
