// wdro: command-line front end for the worst-case expectation toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "wdro/io.hpp"

using namespace wdro;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2 };

struct Flags {
  std::string spec;
  std::string out;
  std::string dump_lp;
  std::string grid;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> runs;
  bool full_scale = false;
};

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidConfig, "--out: cannot open " + out);
  f << text;
}

int status_exit(LpStatus s) { return s == LpStatus::Optimal ? kOk : kInfeasible; }

int cmd_solve(const Flags& fl) {
  auto spec = read_problem_spec(fl.spec);
  if (fl.epsilon) spec.problem.radius = *fl.epsilon;
  const auto r = worst_case_value(spec.problem);
  if (!fl.dump_lp.empty()) write_lp_file(fl.dump_lp, r.model.lp);
  json j = worst_case_json(r);
  j["radius"] = spec.problem.radius;
  j["sample_average"] = sample_average_loss(validated(spec.problem));
  emit(j, fl.out);
  if (r.status == LpStatus::Optimal) {
    std::fprintf(stderr, "value %.12g\n", r.value);
  } else {
    std::fprintf(stderr, "error: worst-case program is %s\n",
                 r.status == LpStatus::Infeasible ? "infeasible" : "unbounded (worst case is +inf)");
  }
  return status_exit(r.status);
}

int cmd_worstcase(const Flags& fl) {
  auto spec = read_problem_spec(fl.spec);
  if (fl.epsilon) spec.problem.radius = *fl.epsilon;
  const auto& p = spec.problem;
  json j;
  double escaping = 0.0;
  std::optional<MembershipReport> report;
  if (std::holds_alternative<SeparableLoss>(p.loss)) {
    const auto r = worst_case_distribution_separable(p);
    j = extremal_json(r);
    escaping = r.escaping_mass;
    if (escaping == 0.0) report = verify_membership(r, p);
  } else {
    const auto* l = std::get_if<PiecewiseAffineLoss>(&p.loss);
    if (!l || l->composition != Composition::Max)
      fail(ErrorKind::InvalidConfig, "loss.type: worstcase supports max_affine and separable losses");
    const auto r = worst_case_distribution(p);
    j = extremal_json(r);
    escaping = r.escaping_mass;
    if (escaping == 0.0) report = verify_membership(r, p);
  }
  j["radius"] = p.radius;
  j["escaping"] = escaping > 0.0;
  j["membership"] = report ? membership_json(*report) : json(nullptr);
  if (escaping > 0.0) std::fprintf(stderr, "note: escaping mass %.12g; the supremum is not attained\n", escaping);
  emit(j, fl.out);
  return kOk;
}

int cmd_calibrate(const Flags& fl) {
  auto cfg = parse_calibrate_config(read_json_file(fl.spec), std::filesystem::path(fl.spec).parent_path().string());
  if (!fl.grid.empty()) cfg.grid = parse_grid_flag(fl.grid);
  if (fl.folds) cfg.folds = *fl.folds;
  if (fl.seed) cfg.seed = *fl.seed;
  json j;
  if (cfg.method == "a_priori") {
    j = {{"method", "a_priori"},
         {"radius", radius_a_priori(cfg.samples.size(), cfg.beta, cfg.concentration)},
         {"beta", cfg.beta},
         {"n", cfg.samples.size()}};
  } else if (cfg.method == "uq_kfold") {
    const auto b = calibrate_uq_kfold(cfg.samples, cfg.portfolio.support, cfg.portfolio.ground_norm, *cfg.safe_set,
                                      cfg.grid, cfg.folds, cfg.seed);
    j = {{"method", "uq_kfold"},
         {"upper", calibration_json(b.upper)},
         {"lower", calibration_json(b.lower)},
         {"upper_value", b.upper_value},
         {"lower_value", b.lower_value}};
  } else {
    const auto dp = portfolio_problem(cfg.portfolio);
    const auto r = cfg.method == "holdout" ? calibrate_holdout(cfg.samples, dp, cfg.grid, cfg.split, cfg.seed)
                                           : calibrate_kfold(cfg.samples, dp, cfg.grid, cfg.folds, cfg.seed);
    j = calibration_json(r);
  }
  emit(j, fl.out);
  return kOk;
}

int cmd_experiment(const Flags& fl) {
  auto e = parse_experiment_config(read_json_file(fl.spec));
  const std::string dir = fl.out.empty() ? "results" : fl.out;
  auto apply = [&](auto& c, std::size_t full_runs) {
    if (fl.full_scale) {
      c.runs = full_runs;
      c.sample_sizes = {30, 300, 3000};
    }
    if (fl.runs) c.runs = *fl.runs;
    if (fl.seed) c.seed = *fl.seed;
    if (fl.folds) c.folds = *fl.folds;
    if (!fl.grid.empty()) c.calibration_grid = parse_grid_flag(fl.grid);
  };
  std::vector<std::string> files;
  if (e.study == "portfolio") {
    apply(e.portfolio, 200);
    files = write_study(dir, run_portfolio_study(e.portfolio));
  } else {
    apply(e.uq, 300);
    files = write_study(dir, run_uq_study(e.uq));
  }
  for (const auto& f : files) std::cout << dir << "/" << f << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case expectations over Wasserstein balls: solve, extremal distributions, calibration, studies"};
  app.require_subcommand(1);
  Flags fl;
  auto common = [&](CLI::App* c, const std::string& spec_help) {
    c->add_option("--spec", fl.spec, spec_help)->required();
    c->add_option("--out", fl.out, "Output path (default: stdout)");
  };
  auto* solve = app.add_subcommand("solve", "Worst-case expectation of a problem file");
  common(solve, "Problem file (JSON)");
  solve->add_option("--epsilon", fl.epsilon, "Override the radius");
  solve->add_option("--dump-lp", fl.dump_lp, "Write the generated linear program to this path");
  auto* worst = app.add_subcommand("worstcase", "Worst-case distribution and ball membership check");
  common(worst, "Problem file (JSON)");
  worst->add_option("--epsilon", fl.epsilon, "Override the radius");
  auto* calib = app.add_subcommand("calibrate", "Choose a radius from data");
  common(calib, "Calibration config (JSON)");
  calib->add_option("--grid", fl.grid, "Candidate radii: a,b,c or log:lo:hi:n (prefix 0, to add zero)");
  calib->add_option("--folds", fl.folds, "Number of folds");
  calib->add_option("--seed", fl.seed, "Shuffle seed");
  auto* exper = app.add_subcommand("experiment", "Run a simulation study and write CSV tables");
  exper->add_option("--spec", fl.spec, "Study config (JSON)")->required();
  exper->add_option("--out", fl.out, "Output directory (default: results)");
  exper->add_option("--grid", fl.grid, "Calibration grid: a,b,c or log:lo:hi:n (prefix 0, to add zero)");
  exper->add_option("--folds", fl.folds, "Number of folds");
  exper->add_option("--seed", fl.seed, "Master seed");
  exper->add_option("--runs", fl.runs, "Simulation runs per sample size");
  exper->add_flag("--full-scale", fl.full_scale, "Original study sizes (hours of CPU time)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  try {
    if (*solve) return cmd_solve(fl);
    if (*worst) return cmd_worstcase(fl);
    if (*calib) return cmd_calibrate(fl);
    return cmd_experiment(fl);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::SolveFailed ? kInfeasible : kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}
