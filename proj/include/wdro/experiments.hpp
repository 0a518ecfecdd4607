#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "wdro/calibrate.hpp"
#include "wdro/csv.hpp"
#include "wdro/market.hpp"
#include "wdro/orthant.hpp"
#include "wdro/portfolio.hpp"
#include "wdro/version.hpp"

namespace wdro {

/// Linear-interpolation sample quantile (type 7).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

/// Runs f(0..n−1), possibly on several threads, and returns results in index order.
template <class F>
auto run_indexed(std::size_t n, std::size_t threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::future<void>> workers;
  std::atomic<std::size_t> next{0};
  for (std::size_t t = 0; t < threads; ++t)
    workers.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
    }));
  for (auto& w : workers) w.get();
  return out;
}

inline std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Zero followed by the default calibration grid.
inline std::vector<double> default_sweep_grid() {
  auto g = default_grid();
  g.insert(g.begin(), 0.0);
  return g;
}

struct PortfolioStudyConfig {
  std::vector<std::size_t> sample_sizes{30, 300};
  /// Radii for the ε sweep.
  std::vector<double> sweep_grid = default_sweep_grid();
  /// Candidate radii for holdout and cross validation.
  std::vector<double> calibration_grid = default_sweep_grid();
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  bool sweep = true;
  bool holdout = true;
  bool kfold = true;
  std::size_t folds = 5;
  double split = 0.8;
  PortfolioSpec spec;
  MarketModel market;
  std::size_t threads = 1;

  void validate() const {
    if (runs == 0) fail(ErrorKind::InvalidConfig, "runs must be positive");
    if (sample_sizes.empty()) fail(ErrorKind::InvalidConfig, "sample_sizes must not be empty");
    spec.validate();
    market.validate();
    if (spec.m != market.m) fail(ErrorKind::DimensionMismatch, "portfolio and market asset counts differ");
    if (sweep) detail::check_grid(sweep_grid);
    if (holdout || kfold) detail::check_grid(calibration_grid);
  }
};

struct SweepRecord {
  std::size_t run = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double certificate = 0.0;
  double out_of_sample = 0.0;
  bool reliable = false;
  Vector x;
};

struct MethodRecord {
  std::size_t run = 0;
  std::size_t n = 0;
  std::string method;
  double radius = 0.0;
  double certificate = 0.0;
  double out_of_sample = 0.0;
  bool reliable = false;
};

struct PortfolioStudyReport {
  PortfolioStudyConfig config;
  std::vector<SweepRecord> sweep;
  std::vector<MethodRecord> methods;
  std::vector<std::uint64_t> run_seeds;
};

/// Hooks for calibrating the mean-CVaR portfolio: train the DRO model, score by the validation mean-CVaR.
inline DecisionProblem portfolio_problem(const PortfolioSpec& spec, const SolverConfig& cfg = {}) {
  DecisionProblem dp;
  dp.train = [spec, cfg](const Dataset& train, double eps) {
    const auto s = solve_portfolio(spec, train, eps, cfg);
    if (s.status != LpStatus::Optimal) fail(ErrorKind::SolveFailed, "portfolio program not solved to optimality");
    return Candidate{s.x, s.certificate};
  };
  dp.score = [spec](const Candidate& c, const Dataset& valid) {
    return empirical_mean_cvar(c.decision, valid, spec.rho, spec.alpha);
  };
  return dp;
}

/// Seed of the dataset used in run `run` with `n` samples.
inline std::uint64_t run_seed(std::uint64_t master, std::size_t n, std::size_t run) { return derive_seed(master, n, run); }

inline PortfolioStudyReport run_portfolio_study(const PortfolioStudyConfig& cfg) {
  cfg.validate();
  PortfolioStudyReport rep;
  rep.config = cfg;
  const auto dp = portfolio_problem(cfg.spec);
  struct RunOut {
    std::vector<SweepRecord> sweep;
    std::vector<MethodRecord> methods;
  };
  for (std::size_t n : cfg.sample_sizes) {
    for (std::size_t r = 0; r < cfg.runs; ++r) rep.run_seeds.push_back(run_seed(cfg.seed, n, r));
    const auto outs = run_indexed(cfg.runs, cfg.threads, [&](std::size_t r) {
      RunOut o;
      const std::uint64_t seed = run_seed(cfg.seed, n, r);
      std::mt19937_64 rng(seed);
      const Dataset data = cfg.market.sample(n, rng);
      auto record = [&](const std::string& method, double eps, const Candidate& c) {
        const double j = out_of_sample_objective(c.decision, cfg.spec, cfg.market);
        o.methods.push_back({r, n, method, eps, c.certificate, j, j <= c.certificate});
      };
      if (cfg.sweep) {
        for (double eps : cfg.sweep_grid) {
          const Candidate c = dp.train(data, eps);
          const double j = out_of_sample_objective(c.decision, cfg.spec, cfg.market);
          o.sweep.push_back({r, n, eps, c.certificate, j, j <= c.certificate, c.decision});
        }
      }
      record("saa", 0.0, dp.train(data, 0.0));
      if (cfg.holdout) {
        const auto h = calibrate_holdout(data, dp, cfg.calibration_grid, cfg.split, splitmix64(seed));
        record("holdout", h.radius, h.solution);
      }
      if (cfg.kfold) {
        const auto k = calibrate_kfold(data, dp, cfg.calibration_grid, cfg.folds, splitmix64(seed));
        record("kfold", k.radius, k.solution);
      }
      return o;
    });
    for (const auto& o : outs) {
      rep.sweep.insert(rep.sweep.end(), o.sweep.begin(), o.sweep.end());
      rep.methods.insert(rep.methods.end(), o.methods.begin(), o.methods.end());
    }
  }
  return rep;
}

/// Mean reliability of the certificate per sweep radius, for sample size n.
inline std::vector<double> reliability_curve(const PortfolioStudyReport& rep, std::size_t n) {
  std::vector<double> out;
  for (double eps : rep.config.sweep_grid) {
    double hits = 0.0, total = 0.0;
    for (const auto& s : rep.sweep)
      if (s.n == n && s.epsilon == eps) {
        hits += s.reliable ? 1.0 : 0.0;
        total += 1.0;
      }
    out.push_back(total > 0.0 ? hits / total : std::nan(""));
  }
  return out;
}

inline std::vector<double> method_values(const PortfolioStudyReport& rep, std::size_t n, const std::string& method,
                                         double MethodRecord::*field) {
  std::vector<double> v;
  for (const auto& m : rep.methods)
    if (m.n == n && m.method == method) v.push_back(m.*field);
  return v;
}

// CSV tables; the names mirror the figure each one reproduces.

inline CsvTable portfolio_raw_table(const PortfolioStudyReport& rep) {
  CsvTable t{{"run", "n", "epsilon", "certificate", "out_of_sample", "reliable"}, {}};
  for (std::size_t j = 0; j < rep.config.spec.m; ++j) t.header.push_back("x" + std::to_string(j + 1));
  for (const auto& s : rep.sweep) {
    std::vector<std::string> r{std::to_string(s.run), std::to_string(s.n), fmt_exact(s.epsilon),
                               fmt_exact(s.certificate), fmt_exact(s.out_of_sample), s.reliable ? "1" : "0"};
    for (double v : s.x) r.push_back(fmt_exact(v));
    t.add(std::move(r));
  }
  return t;
}

/// Average portfolio weights per (n, ε).
inline CsvTable fig4_table(const PortfolioStudyReport& rep) {
  CsvTable t{{"n", "epsilon"}, {}};
  for (std::size_t j = 0; j < rep.config.spec.m; ++j) t.header.push_back("mean_x" + std::to_string(j + 1));
  for (std::size_t n : rep.config.sample_sizes)
    for (double eps : rep.config.sweep_grid) {
      Vector avg(rep.config.spec.m, 0.0);
      double count = 0.0;
      for (const auto& s : rep.sweep)
        if (s.n == n && s.epsilon == eps) {
          for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += s.x[j];
          count += 1.0;
        }
      std::vector<std::string> r{std::to_string(n), fmt_exact(eps)};
      for (double v : avg) r.push_back(fmt_exact(v / count));
      t.add(std::move(r));
    }
  return t;
}

/// Out-of-sample performance tube and certificate reliability per (n, ε).
inline CsvTable fig5_table(const PortfolioStudyReport& rep) {
  CsvTable t{{"n", "epsilon", "mean_out_of_sample", "q20_out_of_sample", "q80_out_of_sample", "mean_certificate",
              "reliability"},
             {}};
  for (std::size_t n : rep.config.sample_sizes) {
    const auto rel = reliability_curve(rep, n);
    for (std::size_t g = 0; g < rep.config.sweep_grid.size(); ++g) {
      const double eps = rep.config.sweep_grid[g];
      std::vector<double> j, c;
      for (const auto& s : rep.sweep)
        if (s.n == n && s.epsilon == eps) {
          j.push_back(s.out_of_sample);
          c.push_back(s.certificate);
        }
      t.add({std::to_string(n), fmt_exact(eps), fmt_exact(mean_of(j)), fmt_exact(quantile(j, 0.2)),
             fmt_exact(quantile(j, 0.8)), fmt_exact(mean_of(c)), fmt_exact(rel[g])});
    }
  }
  return t;
}

/// Performance, certificate and reliability per (n, method).
inline CsvTable fig6_table(const PortfolioStudyReport& rep) {
  CsvTable t{{"n", "method", "mean_out_of_sample", "q20_out_of_sample", "q80_out_of_sample", "mean_certificate",
              "q20_certificate", "q80_certificate", "reliability", "lcx"},
             {}};
  for (std::size_t n : rep.config.sample_sizes)
    for (const std::string method : {"saa", "holdout", "kfold"}) {
      const auto j = method_values(rep, n, method, &MethodRecord::out_of_sample);
      if (j.empty()) continue;
      const auto c = method_values(rep, n, method, &MethodRecord::certificate);
      double rel = 0.0;
      for (std::size_t i = 0; i < j.size(); ++i) rel += j[i] <= c[i] ? 1.0 : 0.0;
      t.add({std::to_string(n), method, fmt_exact(mean_of(j)), fmt_exact(quantile(j, 0.2)),
             fmt_exact(quantile(j, 0.8)), fmt_exact(mean_of(c)), fmt_exact(quantile(c, 0.2)),
             fmt_exact(quantile(c, 0.8)), fmt_exact(rel / static_cast<double>(j.size())), ""});
    }
  return t;
}

/// Average calibrated radii per n.
inline CsvTable fig9_table(const PortfolioStudyReport& rep) {
  CsvTable t{{"n", "method", "mean_radius", "q20_radius", "q80_radius"}, {}};
  for (std::size_t n : rep.config.sample_sizes)
    for (const std::string method : {"holdout", "kfold"}) {
      const auto e = method_values(rep, n, method, &MethodRecord::radius);
      if (e.empty()) continue;
      t.add({std::to_string(n), method, fmt_exact(mean_of(e)), fmt_exact(quantile(e, 0.2)), fmt_exact(quantile(e, 0.8))});
    }
  return t;
}

// Uncertainty quantification study.

struct UqStudyConfig {
  std::vector<std::size_t> sample_sizes{30, 300};
  std::vector<double> sweep_grid = default_sweep_grid();
  /// Candidate radii for the UQ cross validation.
  std::vector<double> calibration_grid = default_sweep_grid();
  /// Candidate radii for calibrating the portfolio that defines the event.
  std::vector<double> portfolio_grid = default_sweep_grid();
  std::size_t runs = 100;
  std::uint64_t seed = 1;
  std::size_t folds = 5;
  bool sweep = true;
  bool calibrate = true;
  /// Zero-based indices of the benchmark assets the portfolio must beat jointly.
  std::vector<std::size_t> benchmark_assets{7, 8, 9};
  PortfolioSpec spec;
  MarketModel market;
  std::size_t threads = 1;

  void validate() const {
    if (runs == 0) fail(ErrorKind::InvalidConfig, "runs must be positive");
    if (sample_sizes.empty()) fail(ErrorKind::InvalidConfig, "sample_sizes must not be empty");
    spec.validate();
    market.validate();
    if (spec.m != market.m) fail(ErrorKind::DimensionMismatch, "portfolio and market asset counts differ");
    if (benchmark_assets.empty()) fail(ErrorKind::InvalidConfig, "benchmark_assets must not be empty");
    for (std::size_t i : benchmark_assets)
      if (i >= spec.m) fail(ErrorKind::InvalidConfig, "benchmark asset index out of range");
    if (sweep) detail::check_grid(sweep_grid);
    if (calibrate) detail::check_grid(calibration_grid);
    detail::check_grid(portfolio_grid);
  }
};

/// {ξ : ⟨x, ξ⟩ ≥ ξ_i for every benchmark asset i} as {Aξ ≤ 0}.
inline UqSet outperformance_set(std::span<const double> x, const std::vector<std::size_t>& assets) {
  UqSet s;
  s.kind = UqKind::Best;
  s.A = Matrix(0, x.size());
  for (std::size_t i : assets) {
    Vector row(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) row[j] = (j == i ? 1.0 : 0.0) - x[j];
    s.A.append_row(row);
    s.b.push_back(0.0);
  }
  return s;
}

/// Exact P[ξ ∈ set] under the Gaussian market.
inline double gaussian_probability(const UqSet& set, const MarketModel& market) {
  const Vector mu = multiply(set.A, market.mean());
  const Matrix sigma = market.covariance();
  Vector mean(set.b.size());
  for (std::size_t k = 0; k < mean.size(); ++k) mean[k] = mu[k] - set.b[k];
  Matrix cov(set.b.size(), set.b.size());
  for (std::size_t p = 0; p < mean.size(); ++p)
    for (std::size_t q = 0; q < mean.size(); ++q) cov(p, q) = dot(set.A.row(p), multiply(sigma, set.A.row(q)));
  return gaussian_orthant_probability(mean, cov);
}

struct UqSweepRecord {
  std::size_t run = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  double upper = 1.0;
  double lower = 0.0;
  double truth = 0.0;
  bool reliable = false;
};

struct UqCalibRecord {
  std::size_t run = 0;
  std::size_t n = 0;
  double radius_upper = 0.0;
  double radius_lower = 0.0;
  /// Cross-validated radius of the portfolio that defines the event.
  double radius_portfolio = 0.0;
  double upper = 1.0;
  double lower = 0.0;
  double truth = 0.0;
  bool reliable = false;
};

struct UqStudyReport {
  UqStudyConfig config;
  std::vector<UqSweepRecord> sweep;
  std::vector<UqCalibRecord> calibrated;
  std::vector<std::uint64_t> run_seeds;
};

/// Bracket contains the truth up to the LP rounding tolerance.
inline bool bracket_covers(double lower, double upper, double truth) {
  return lower <= truth + detail::kCoverTol && truth <= upper + detail::kCoverTol;
}

inline UqStudyReport run_uq_study(const UqStudyConfig& cfg) {
  cfg.validate();
  UqStudyReport rep;
  rep.config = cfg;
  const auto dp = portfolio_problem(cfg.spec);
  struct RunOut {
    std::vector<UqSweepRecord> sweep;
    std::vector<UqCalibRecord> calibrated;
  };
  const Polytope support = cfg.spec.support;
  const GroundNorm norm = cfg.spec.ground_norm;
  for (std::size_t n : cfg.sample_sizes) {
    for (std::size_t r = 0; r < cfg.runs; ++r) rep.run_seeds.push_back(run_seed(cfg.seed, n, r));
    const auto outs = run_indexed(cfg.runs, cfg.threads, [&](std::size_t r) {
      RunOut o;
      const std::uint64_t seed = run_seed(cfg.seed, n, r);
      std::mt19937_64 rng(seed);
      const Dataset data = cfg.market.sample(n, rng);
      const auto port = calibrate_kfold(data, dp, cfg.portfolio_grid, cfg.folds, splitmix64(seed));
      const UqSet event = outperformance_set(port.solution.decision, cfg.benchmark_assets);
      const double truth = gaussian_probability(event, cfg.market);
      if (cfg.sweep)
        for (double eps : cfg.sweep_grid) {
          const double up = uq_upper_bound(data, support, norm, event, eps);
          const double lo = uq_lower_bound(data, support, norm, event, eps);
          o.sweep.push_back({r, n, eps, up, lo, truth, bracket_covers(lo, up, truth)});
        }
      if (cfg.calibrate) {
        const auto b = calibrate_uq_kfold(data, support, norm, event, cfg.calibration_grid, cfg.folds,
                                          splitmix64(seed ^ 0x5555555555555555ULL));
        o.calibrated.push_back({r, n, b.upper.radius, b.lower.radius, port.radius, b.upper_value, b.lower_value, truth,
                                bracket_covers(b.lower_value, b.upper_value, truth)});
      }
      return o;
    });
    for (const auto& o : outs) {
      rep.sweep.insert(rep.sweep.end(), o.sweep.begin(), o.sweep.end());
      rep.calibrated.insert(rep.calibrated.end(), o.calibrated.begin(), o.calibrated.end());
    }
  }
  return rep;
}

inline CsvTable uq_raw_table(const UqStudyReport& rep) {
  CsvTable t{{"run", "n", "epsilon", "upper", "lower", "truth", "reliable"}, {}};
  for (const auto& s : rep.sweep)
    t.add({std::to_string(s.run), std::to_string(s.n), fmt_exact(s.epsilon), fmt_exact(s.upper), fmt_exact(s.lower),
           fmt_exact(s.truth), s.reliable ? "1" : "0"});
  return t;
}

/// Excess Ĵ⁺ − P[A] and shortfall Ĵ⁻ − P[A] per (n, ε), with bracket reliability.
inline CsvTable fig10_table(const UqStudyReport& rep) {
  CsvTable t{{"n", "epsilon", "mean_excess", "q20_excess", "q80_excess", "mean_shortfall", "q20_shortfall",
              "q80_shortfall", "reliability"},
             {}};
  for (std::size_t n : rep.config.sample_sizes)
    for (double eps : rep.config.sweep_grid) {
      std::vector<double> ex, sh;
      double rel = 0.0;
      for (const auto& s : rep.sweep)
        if (s.n == n && s.epsilon == eps) {
          ex.push_back(s.upper - s.truth);
          sh.push_back(s.lower - s.truth);
          rel += s.reliable ? 1.0 : 0.0;
        }
      if (ex.empty()) continue;
      t.add({std::to_string(n), fmt_exact(eps), fmt_exact(mean_of(ex)), fmt_exact(quantile(ex, 0.2)),
             fmt_exact(quantile(ex, 0.8)), fmt_exact(mean_of(sh)), fmt_exact(quantile(sh, 0.2)),
             fmt_exact(quantile(sh, 0.8)), fmt_exact(rel / static_cast<double>(ex.size()))});
    }
  return t;
}

/// Calibrated bounds and radii per n.
inline CsvTable fig11_table(const UqStudyReport& rep) {
  CsvTable t{{"n", "mean_excess", "q20_excess", "q80_excess", "mean_shortfall", "q20_shortfall", "q80_shortfall",
              "mean_radius_upper", "mean_radius_lower", "mean_radius_portfolio", "reliability"},
             {}};
  for (std::size_t n : rep.config.sample_sizes) {
    std::vector<double> ex, sh, ru, rl, rp;
    double rel = 0.0;
    for (const auto& c : rep.calibrated)
      if (c.n == n) {
        ex.push_back(c.upper - c.truth);
        sh.push_back(c.lower - c.truth);
        ru.push_back(c.radius_upper);
        rl.push_back(c.radius_lower);
        rp.push_back(c.radius_portfolio);
        rel += c.reliable ? 1.0 : 0.0;
      }
    if (ex.empty()) continue;
    t.add({std::to_string(n), fmt_exact(mean_of(ex)), fmt_exact(quantile(ex, 0.2)), fmt_exact(quantile(ex, 0.8)),
           fmt_exact(mean_of(sh)), fmt_exact(quantile(sh, 0.2)), fmt_exact(quantile(sh, 0.8)), fmt_exact(mean_of(ru)),
           fmt_exact(mean_of(rl)), fmt_exact(mean_of(rp)), fmt_exact(rel / static_cast<double>(ex.size()))});
  }
  return t;
}

// Manifests.

inline nlohmann::json market_json(const MarketModel& m) {
  return {{"m", m.m},
          {"systematic_scale", m.systematic_scale},
          {"idiosyncratic_mean_step", m.idiosyncratic_mean_step},
          {"idiosyncratic_scale_step", m.idiosyncratic_scale_step},
          {"scale_interpretation", to_string(m.scale_interpretation)}};
}

inline nlohmann::json spec_json(const PortfolioSpec& s) {
  nlohmann::json j = {{"m", s.m}, {"rho", s.rho}, {"alpha", s.alpha}, {"norm", to_string(s.ground_norm)}};
  if (s.support.is_whole_space()) {
    j["support"] = "free";
  } else {
    nlohmann::json c = nlohmann::json::array();
    for (std::size_t r = 0; r < s.support.num_rows(); ++r)
      c.push_back(Vector(s.support.C.row(r).begin(), s.support.C.row(r).end()));
    j["support"] = {{"C", c}, {"d", s.support.d}};
  }
  return j;
}

inline nlohmann::json build_info() {
  return {{"tool", "wdro"},
          {"version", kVersion},
          {"compiler", __VERSION__},
          {"boost", BOOST_LIB_VERSION},
          {"cxx", __cplusplus}};
}

inline nlohmann::json manifest(const PortfolioStudyReport& rep, const std::vector<std::string>& files) {
  const auto& c = rep.config;
  return {{"study", "portfolio"},
          {"build", build_info()},
          {"config",
           {{"sample_sizes", c.sample_sizes},
            {"sweep_grid", c.sweep_grid},
            {"calibration_grid", c.calibration_grid},
            {"runs", c.runs},
            {"seed", c.seed},
            {"sweep", c.sweep},
            {"holdout", c.holdout},
            {"kfold", c.kfold},
            {"folds", c.folds},
            {"split", c.split},
            {"spec", spec_json(c.spec)},
            {"market", market_json(c.market)}}},
          {"run_seeds", rep.run_seeds},
          {"files", files},
          {"notes", "LCX baseline not implemented; the lcx column is left empty."}};
}

inline nlohmann::json manifest(const UqStudyReport& rep, const std::vector<std::string>& files) {
  const auto& c = rep.config;
  return {{"study", "uq"},
          {"build", build_info()},
          {"config",
           {{"sample_sizes", c.sample_sizes},
            {"sweep_grid", c.sweep_grid},
            {"calibration_grid", c.calibration_grid},
            {"portfolio_grid", c.portfolio_grid},
            {"runs", c.runs},
            {"seed", c.seed},
            {"folds", c.folds},
            {"sweep", c.sweep},
            {"calibrate", c.calibrate},
            {"benchmark_assets", c.benchmark_assets},
            {"spec", spec_json(c.spec)},
            {"market", market_json(c.market)}}},
          {"run_seeds", rep.run_seeds},
          {"files", files}};
}

/// Writes the CSV tables and manifest.json into `dir`; returns the written file names.
inline std::vector<std::string> write_study(const std::string& dir, const PortfolioStudyReport& rep) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, CsvTable>> files;
  if (rep.config.sweep) {
    files.emplace_back("portfolio_runs.csv", portfolio_raw_table(rep));
    files.emplace_back("fig4_weights.csv", fig4_table(rep));
    files.emplace_back("fig5_performance.csv", fig5_table(rep));
  }
  files.emplace_back("fig6_methods.csv", fig6_table(rep));
  files.emplace_back("fig9_radii.csv", fig9_table(rep));
  std::vector<std::string> names;
  for (const auto& [name, table] : files) {
    write_csv_file(dir + "/" + name, table);
    names.push_back(name);
  }
  std::ofstream(dir + "/manifest.json") << manifest(rep, names).dump(2) << "\n";
  names.push_back("manifest.json");
  return names;
}

inline std::vector<std::string> write_study(const std::string& dir, const UqStudyReport& rep) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, CsvTable>> files;
  if (rep.config.sweep) {
    files.emplace_back("uq_runs.csv", uq_raw_table(rep));
    files.emplace_back("fig10_bounds.csv", fig10_table(rep));
  }
  if (rep.config.calibrate) files.emplace_back("fig11_calibrated.csv", fig11_table(rep));
  std::vector<std::string> names;
  for (const auto& [name, table] : files) {
    write_csv_file(dir + "/" + name, table);
    names.push_back(name);
  }
  std::ofstream(dir + "/manifest.json") << manifest(rep, names).dump(2) << "\n";
  names.push_back("manifest.json");
  return names;
}

}  // namespace wdro
