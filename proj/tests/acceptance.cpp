// Acceptance run: every criterion prints one PASS/FAIL line. Criteria 1 to 11 are evaluated twice and
// their result fingerprints compared byte for byte for the determinism criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wdro/experiments.hpp"
#include "wdro/extremal.hpp"

using namespace wdro;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string fingerprint;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
  void note(double v) { fingerprint += fmt_exact(v) + ";"; }
};

PiecewiseAffineLoss random_loss(std::mt19937_64& rng, std::size_t m, std::size_t K, Composition c = Composition::Max) {
  std::normal_distribution<double> g(0.0, 1.0);
  PiecewiseAffineLoss l{{}, c};
  for (std::size_t k = 0; k < K; ++k) {
    Vector a(m);
    for (auto& v : a) v = g(rng);
    l.pieces.push_back({a, g(rng)});
  }
  return l;
}

Dataset samples_in(std::mt19937_64& rng, const Polytope& xi, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  while (d.size() < n) {
    Vector x(xi.m);
    for (auto& v : x) v = 2.0 * u(rng) - 1.0;
    if (xi.contains(x)) d.push_back(x);
  }
  return d;
}

DroProblem random_compact(std::mt19937_64& rng, int t) {
  const std::size_t m = 1 + rng() % 3;
  const Polytope xi = t % 2 ? Polytope::box(m, -1.0, 1.0) : Polytope::simplex(m);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {samples_in(rng, xi, 1 + rng() % 10), xi, u(rng), t % 4 < 2 ? GroundNorm::One : GroundNorm::Inf,
          random_loss(rng, m, 1 + rng() % 3)};
}

double value_of(const DroProblem& p) {
  const auto r = worst_case_value(p);
  if (r.status != LpStatus::Optimal) fail(ErrorKind::SolveFailed, "acceptance: program not optimal");
  return r.value;
}

PiecewiseAffineLoss hinge_at_one() { return {{{{0.0}, 0.0}, {{1.0}, -1.0}}, Composition::Max}; }

Outcome duality_gap() {
  Outcome o;
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto p = random_compact(rng, t);
    const double primal = value_of(p);
    const double dual = worst_case_distribution(p).objective_value;
    worst = std::max(worst, std::fabs(primal - dual));
    o.note(primal);
    o.note(dual);
  }
  o.check(worst <= 1e-6, "max gap " + fmt_exact(worst));
  o.detail = o.pass ? "max gap " + fmt_exact(worst) : o.detail;
  return o;
}

Outcome saa_anchor() {
  Outcome o;
  std::mt19937_64 rng(102);
  double worst = 0.0;
  auto compare = [&](const DroProblem& p, double expected, const char* name) {
    const double v = value_of(p);
    o.note(v);
    const double e = std::fabs(v - expected);
    worst = std::max(worst, e);
    o.check(e <= 1e-9, std::string(name) + " off by " + fmt_exact(e));
  };
  const Polytope line = Polytope::box(1, -2.0, 2.0);
  for (int t = 0; t < 10; ++t) {
    const std::size_t m = 1 + rng() % 3, n = 1 + rng() % 8;
    const Polytope box = Polytope::box(m, -1.0, 1.0);
    const Dataset d = samples_in(rng, box, n);
    const GroundNorm norm = t % 2 ? GroundNorm::One : GroundNorm::Inf;
    for (auto comp : {Composition::Max, Composition::Min}) {
      const auto l = random_loss(rng, m, 1 + rng() % 3, comp);
      double avg = 0.0;
      for (const auto& x : d) {
        double best = comp == Composition::Max ? -kInf : kInf;
        for (const auto& pc : l.pieces) {
          const double v = dot(pc.a, x) + pc.b;
          best = comp == Composition::Max ? std::max(best, v) : std::min(best, v);
        }
        avg += best / static_cast<double>(n);
      }
      compare({d, t % 3 ? box : Polytope::whole_space(m), 0.0, norm, l}, avg,
              comp == Composition::Max ? "max_affine" : "min_affine");
    }

    Dataset d1 = samples_in(rng, Polytope::box(1, -1.0, 1.0), n);
    for (auto& x : d1) x[0] *= 2.0;
    const double cut = 0.1 * static_cast<double>(static_cast<int>(rng() % 21) - 10);
    double above = 0.0, below = 0.0, hinge0 = 0.0;
    for (const auto& x : d1) {
      above += (x[0] >= cut ? 1.0 : 0.0) / static_cast<double>(n);
      below += (x[0] <= cut ? 1.0 : 0.0) / static_cast<double>(n);
      hinge0 += std::min(0.0, x[0]) / static_cast<double>(n);
    }
    compare({d1, line, 0.0, GroundNorm::One, UqSet{Matrix::from_rows({{1.0}}), {cut}, UqKind::Worst}}, above,
            "uq_worst");
    compare({d1, line, 0.0, GroundNorm::One, UqSet{Matrix::from_rows({{1.0}}), {cut}, UqKind::Best}}, below,
            "uq_best");

    TwoStageSpec obj;
    obj.variant = TwoStageVariant::ObjectiveUncertainty;
    obj.Q = Matrix::from_rows({{1.0}});
    obj.W = Matrix::from_rows({{1.0}, {-1.0}});
    obj.h = {0.0, -1.0};
    compare({d1, line, 0.0, GroundNorm::One, obj}, hinge0, "two_stage_objective");

    // min{y : y ≥ ξ₁, y ≥ 0.5 − ξ₂} = max(ξ₁, 0.5 − ξ₂)
    TwoStageSpec rhs;
    rhs.variant = TwoStageVariant::RhsUncertainty;
    rhs.W = Matrix::from_rows({{1.0}, {1.0}});
    rhs.H = Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
    rhs.h = {0.0, 0.5};
    rhs.q = {1.0};
    const Dataset d2 = samples_in(rng, Polytope::box(2, -1.0, 1.0), n);
    double rhs_avg = 0.0;
    for (const auto& x : d2) rhs_avg += std::max(x[0], 0.5 - x[1]) / static_cast<double>(n);
    compare({d2, Polytope::box(2, -1.0, 1.0), 0.0, norm, rhs}, rhs_avg, "two_stage_rhs");

    const auto l1 = random_loss(rng, 1, 2), l2 = random_loss(rng, 2, 3);
    const Dataset d3 = samples_in(rng, Polytope::box(3, -1.0, 1.0), n);
    double sep = 0.0;
    for (const auto& x : d3) {
      double s1 = -kInf, s2 = -kInf;
      for (const auto& pc : l1.pieces) s1 = std::max(s1, pc.a[0] * x[0] + pc.b);
      for (const auto& pc : l2.pieces) s2 = std::max(s2, pc.a[0] * x[1] + pc.a[1] * x[2] + pc.b);
      sep += (s1 + s2) / static_cast<double>(n);
    }
    compare({d3, Polytope::whole_space(3), 0.0, norm,
             SeparableLoss{{Stage{l1, Polytope::box(1, -1, 1)}, Stage{l2, Polytope::box(2, -1, 1)}}}},
            sep, "separable");
  }
  if (o.pass) o.detail = "max deviation " + fmt_exact(worst) + " over 70 instances";
  return o;
}

Outcome escaping_example() {
  Outcome o;
  for (double eps : {0.1, 0.5, 1.0}) {
    const DroProblem p{{{0.0}}, Polytope::whole_space(1), eps, GroundNorm::One, hinge_at_one()};
    const double v = value_of(p);
    const auto r = worst_case_distribution(p);
    o.note(v);
    o.note(r.escaping_mass);
    o.check(std::fabs(v - eps) <= 1e-10, "value " + fmt_exact(v) + " at eps " + fmt_exact(eps));
    o.check(r.escaping_mass > 0.0, "no escaping mass at eps " + fmt_exact(eps));
  }
  if (o.pass) o.detail = "value = eps and escaping mass > 0 for eps in {0.1, 0.5, 1}";
  return o;
}

Outcome closed_form() {
  Outcome o;
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Dataset d(1 + rng() % 6, Vector(2));
    for (auto& x : d)
      for (auto& v : x) v = u(rng);
    const DroProblem p{d, Polytope::whole_space(2), 0.05 * static_cast<double>(rng() % 40),
                       t % 2 ? GroundNorm::One : GroundNorm::Inf, random_loss(rng, 2, 1 + rng() % 4)};
    const double cf = convex_closed_form(p), lp = value_of(p);
    o.note(cf);
    o.note(lp);
    worst = std::max(worst, std::fabs(cf - lp));
  }
  o.check(worst <= 1e-8, "max deviation " + fmt_exact(worst));
  if (o.pass) o.detail = "max deviation " + fmt_exact(worst);
  return o;
}

// max Σ π_ij ℓ(g_j) s.t. Σ_j π_ij = 1/N, Σ π_ij |ξ_i − g_j| ≤ ε, π ≥ 0.
double grid_transport_lp(const oracle::Vec& xs, const oracle::Vec& grid, const PiecewiseAffineLoss& l, double eps) {
  const std::size_t n = xs.size(), g = grid.size();
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < g; ++j) lp.add_variable(l(Vector{grid[j]}));
  Vector budget(n * g, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vector row(n * g, 0.0);
    for (std::size_t j = 0; j < g; ++j) {
      row[i * g + j] = 1.0;
      budget[i * g + j] = std::fabs(xs[i] - grid[j]);
    }
    lp.add_constraint(row, Relation::Equal, 1.0 / static_cast<double>(n));
  }
  lp.add_constraint(budget, Relation::LessEqual, eps);
  const auto sol = solve_lp(lp);
  if (!sol.optimal()) fail(ErrorKind::SolveFailed, "grid transport program not optimal");
  return *sol.objective_value;
}

Outcome transport_oracle() {
  Outcome o;
  std::mt19937_64 rng(105);
  const auto grid = oracle::uniform_grid(-2, 2, 1000);
  double worst_slack = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto l = random_loss(rng, 1, 1 + rng() % 3, t % 2 ? Composition::Min : Composition::Max);
    oracle::Vec xs(1 + rng() % 3);
    for (auto& x : xs) x = grid[rng() % grid.size()];
    Dataset d;
    for (double x : xs) d.push_back({x});
    const double eps = 0.1 * static_cast<double>(1 + rng() % 10);
    const double v = value_of({d, Polytope::box(1, -2.0, 2.0), eps, GroundNorm::One, l});
    const double g = grid_transport_lp(xs, grid, l, eps);
    const double dual = oracle::grid_dro_1d(xs, grid, [&](double x) { return l(Vector{x}); }, eps);
    o.note(v);
    o.note(g);
    const double tol = l.kappa(GroundNorm::One) * 1e-3 + 1e-6;
    o.check(g <= v + 1e-9, "grid optimum " + fmt_exact(g) + " exceeds " + fmt_exact(v));
    o.check(v - g <= tol, "gap " + fmt_exact(v - g) + " above " + fmt_exact(tol));
    o.check(std::fabs(g - dual) <= 1e-6, "grid LP and its Lagrangian dual disagree");
    worst_slack = std::max(worst_slack, (v - g) / tol);
  }
  if (o.pass) o.detail = "largest gap / (kappa h + 1e-6) = " + fmt_exact(worst_slack);
  return o;
}

Outcome ball_membership() {
  Outcome o;
  std::mt19937_64 rng(106);
  double worst_dist = -kInf, worst_loss = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto p = random_compact(rng, t);
    const auto r = worst_case_distribution(p);
    o.check(r.escaping_mass == 0.0, "escaping mass on a compact support");
    const auto rep = verify_membership(r, p);
    const double v = value_of(p);
    o.note(rep.distance);
    o.note(rep.expected_loss);
    o.check(rep.distance <= p.radius + 1e-6, "distance " + fmt_exact(rep.distance) + " > " + fmt_exact(p.radius));
    o.check(std::fabs(rep.expected_loss - v) <= 1e-6, "expected loss differs from the program value");
    worst_dist = std::max(worst_dist, rep.distance - p.radius);
    worst_loss = std::max(worst_loss, std::fabs(rep.expected_loss - v));
  }
  if (o.pass)
    o.detail = "max distance - eps " + fmt_exact(worst_dist) + ", max loss deviation " + fmt_exact(worst_loss);
  return o;
}

Outcome uq_hand() {
  Outcome o;
  const Dataset d{{0.0}, {1.5}};
  const double w = value_of({d, Polytope::box(1, -2.0, 2.0), 0.25, GroundNorm::One,
                             UqSet{Matrix::from_rows({{1.0}}), {1.0}, UqKind::Worst}});
  const double b = value_of({d, Polytope::box(1, -2.0, 2.0), 0.25, GroundNorm::One,
                             UqSet{Matrix::from_rows({{1.0}}), {1.0}, UqKind::Best}});
  o.note(w);
  o.note(b);
  o.check(std::fabs(w - 0.75) <= 1e-9, "worst " + fmt_exact(w));
  o.check(std::fabs(b - 1.0) <= 1e-9, "best " + fmt_exact(b));
  if (o.pass) o.detail = "worst " + fmt_exact(w) + ", best " + fmt_exact(b);
  return o;
}

Outcome equal_weights() {
  Outcome o;
  Polytope orthant{Matrix(0, 10), {}, 10};
  for (std::size_t j = 0; j < 10; ++j) {
    Vector r(10, 0.0);
    r[j] = -1.0;
    orthant.add_row(r, 1.0);
  }
  const MarketModel market;
  std::string detail;
  for (const auto& [name, support] :
       std::vector<std::pair<std::string, Polytope>>{{"whole space", Polytope::whole_space(10)}, {"xi >= -e", orthant}}) {
    std::mt19937_64 rng(108);
    PortfolioSpec spec;
    spec.support = support;
    const auto s = solve_portfolio(spec, market.sample(30, rng), 10.0);
    double dev = 0.0;
    for (double v : s.x) dev = std::max(dev, std::fabs(v - 0.1));
    for (double v : s.x) o.note(v);
    o.check(s.status == LpStatus::Optimal && dev <= 1e-4, name + ": deviation " + fmt_exact(dev));
    detail += name + " deviation " + fmt_exact(dev) + "; ";
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome two_stage() {
  Outcome o;
  TwoStageSpec rhs;
  rhs.variant = TwoStageVariant::RhsUncertainty;
  rhs.W = Matrix::from_rows({{1.0}, {1.0}});
  rhs.H = Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});
  rhs.h = {0.0, 0.5};
  rhs.q = {1.0};
  const auto pieces = two_stage_pieces(rhs);
  std::mt19937_64 rng(109);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Polytope box = Polytope::box(2, -1.0, 1.0);
    DroProblem p{samples_in(rng, box, 1 + rng() % 8), box, 0.05 * static_cast<double>(rng() % 20),
                 t % 2 ? GroundNorm::One : GroundNorm::Inf, rhs};
    DroProblem q = p;
    q.loss = pieces;
    const double a = value_of(p), b = value_of(q);
    o.note(a);
    worst = std::max(worst, std::fabs(a - b));
  }
  o.check(worst <= 1e-10, "variant (ii) deviation " + fmt_exact(worst));

  TwoStageSpec obj;
  obj.variant = TwoStageVariant::ObjectiveUncertainty;
  obj.Q = Matrix::from_rows({{1.0}});
  obj.W = Matrix::from_rows({{1.0}, {-1.0}});
  obj.h = {0.0, -1.0};
  const double v = value_of({{{1.0}, {-1.0}}, Polytope::box(1, -2.0, 2.0), 0.25, GroundNorm::One, obj});
  o.note(v);
  o.check(std::fabs(v + 0.25) <= 1e-9, "variant (i) value " + fmt_exact(v));
  if (o.pass) o.detail = "variant (ii) deviation " + fmt_exact(worst) + ", variant (i) value " + fmt_exact(v);
  return o;
}

std::string table_bytes(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

Outcome reliability_shape() {
  Outcome o;
  PortfolioStudyConfig cfg;
  cfg.sample_sizes = {30};
  cfg.runs = 100;
  cfg.seed = 110;
  cfg.holdout = false;
  cfg.threads = default_threads();
  const auto rep = run_portfolio_study(cfg);
  const auto rel = reliability_curve(rep, 30);
  std::size_t drops = 0;
  for (std::size_t g = 1; g < rel.size(); ++g) drops += rel[g] < rel[g - 1] ? 1 : 0;
  const double saa = mean_of(method_values(rep, 30, "saa", &MethodRecord::out_of_sample));
  const double cv = mean_of(method_values(rep, 30, "kfold", &MethodRecord::out_of_sample));
  o.fingerprint = table_bytes(portfolio_raw_table(rep));
  o.check(drops <= 1, std::to_string(drops) + " decreasing steps in the reliability curve");
  o.check(cv <= saa, "mean J at cross-validated radius " + fmt_exact(cv) + " > SAA " + fmt_exact(saa));
  if (o.pass)
    o.detail = std::to_string(drops) + " decreasing steps; mean J cv " + fmt_exact(cv) + " <= saa " + fmt_exact(saa);
  return o;
}

Outcome radius_decay() {
  Outcome o;
  PortfolioStudyConfig cfg;
  cfg.sample_sizes = {30, 300};
  cfg.runs = 100;
  cfg.seed = 111;
  cfg.sweep = false;
  cfg.holdout = false;
  cfg.threads = default_threads();
  const auto rep = run_portfolio_study(cfg);
  const double r30 = mean_of(method_values(rep, 30, "kfold", &MethodRecord::radius));
  const double r300 = mean_of(method_values(rep, 300, "kfold", &MethodRecord::radius));
  o.fingerprint = table_bytes(fig9_table(rep));
  o.check(r300 < r30, "mean radius N=300 " + fmt_exact(r300) + " >= N=30 " + fmt_exact(r30));
  if (o.pass) o.detail = "mean radius N=30 " + fmt_exact(r30) + ", N=300 " + fmt_exact(r300);
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

Outcome guarded(const Criterion& c) {
  try {
    return c.run();
  } catch (const std::exception& e) {
    Outcome o;
    o.check(false, std::string("exception: ") + e.what());
    return o;
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"strong duality gap", duality_gap},
      {"zero-radius sample average", saa_anchor},
      {"escaping-mass example", escaping_example},
      {"closed form on the plane", closed_form},
      {"grid transport oracle", transport_oracle},
      {"Wasserstein ball membership", ball_membership},
      {"uncertainty quantification hand instances", uq_hand},
      {"large radius gives equal weights", equal_weights},
      {"two-stage cross-check", two_stage},
      {"reliability curve and cross-validated performance", reliability_shape},
      {"calibrated radius decays with N", radius_decay},
  };
  bool all = true;
  std::vector<std::string> prints;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = guarded(criteria[i]);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %s: %s (%s) [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
    prints.push_back(o.fingerprint);
  }
  std::size_t mismatched = 0;
  std::string which;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Outcome again = guarded(criteria[i]);
    if (again.fingerprint != prints[i] || prints[i].empty()) {
      ++mismatched;
      which += " " + std::to_string(i + 1);
    }
  }
  const bool det = mismatched == 0;
  std::printf("criterion 12 %s: determinism (%s)\n", det ? "PASS" : "FAIL",
              det ? "criteria 1-11 reproduce byte for byte" : ("differs:" + which).c_str());
  all = all && det;
  return all ? 0 : 1;
}
