#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "wdro/calibrate.hpp"
#include "wdro/csv.hpp"
#include "wdro/experiments.hpp"
#include "wdro/extremal.hpp"
#include "wdro/problem.hpp"
#include "wdro/reformulate.hpp"

namespace wdro {

using json = nlohmann::json;

inline constexpr int kSpecVersion = 1;

/// Problem file: a DroProblem plus where its samples came from.
struct ProblemSpecFile {
  int version = kSpecVersion;
  DroProblem problem;
  /// CSV path as written in the file; empty when samples are inline.
  std::string samples_path;
};

namespace detail {

/// Typed access to a JSON object with strict key checking and field paths in errors.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorKind::ParseError, where() + ": expected an object");
  }

  std::string where() const { return path_.empty() ? "<root>" : path_; }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(ErrorKind::ParseError, sub(key) + ": missing required field");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  /// Raises on any key not consumed through get/optional.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(ErrorKind::ParseError, sub(k) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(ErrorKind::ParseError, path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ErrorKind::ParseError, path + ": expected a finite number");
  return v;
}

inline std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    fail(ErrorKind::ParseError, path + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::uint64_t as_seed(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    fail(ErrorKind::ParseError, path + ": expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(ErrorKind::ParseError, path + ": expected true or false");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(ErrorKind::ParseError, path + ": expected a string");
  return j.get<std::string>();
}

inline Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorKind::ParseError, path + ": expected an array of numbers");
  Vector v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

inline std::vector<std::size_t> as_counts(const json& j, const std::string& path) {
  if (!j.is_array()) fail(ErrorKind::ParseError, path + ": expected an array of integers");
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_count(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

/// Rows of equal length; `cols` gives the width when the array is empty.
inline Matrix as_matrix(const json& j, const std::string& path, std::size_t cols = 0) {
  if (!j.is_array()) fail(ErrorKind::ParseError, path + ": expected an array of rows");
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rows.push_back(as_vector(j[i], path + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size())
      fail(ErrorKind::ParseError, path + "[" + std::to_string(i) + "]: row length differs from row 0");
  }
  return Matrix::from_rows(rows, cols);
}

inline json matrix_json(const Matrix& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(Vector(m.row(r).begin(), m.row(r).end()));
  return a;
}

}  // namespace detail

inline GroundNorm parse_norm(const json& j, const std::string& path) {
  const std::string s = detail::as_string(j, path);
  if (s == "l1") return GroundNorm::One;
  if (s == "linf") return GroundNorm::Inf;
  fail(ErrorKind::NormUnsupported, path + ": unsupported norm '" + s + "'; supported norms are \"l1\" and \"linf\"");
}

/// "free" or {"C": rows, "d": vector} in dimension m.
inline Polytope parse_support(const json& j, const std::string& path, std::size_t m) {
  if (j.is_string()) {
    if (j.get<std::string>() != "free") fail(ErrorKind::ParseError, path + ": expected \"free\" or {C, d}");
    return Polytope::whole_space(m);
  }
  detail::Fields f(j, path);
  Polytope p{detail::as_matrix(f.get("C"), f.sub("C"), m), detail::as_vector(f.get("d"), f.sub("d")), m};
  f.finish();
  if (p.C.rows() != p.d.size()) fail(ErrorKind::ParseError, path + ": C and d have different row counts");
  if (p.C.rows() > 0 && p.C.cols() != m)
    fail(ErrorKind::ParseError, path + ".C: rows must have length " + std::to_string(m));
  return p;
}

inline json support_json(const Polytope& p) {
  if (p.is_whole_space()) return "free";
  return {{"C", detail::matrix_json(p.C)}, {"d", p.d}};
}

inline json norm_json(GroundNorm n) { return to_string(n); }

namespace detail {

inline PiecewiseAffineLoss parse_pieces(Fields& f, Composition c) {
  const json& arr = f.get("pieces");
  if (!arr.is_array() || arr.empty()) fail(ErrorKind::ParseError, f.sub("pieces") + ": expected a nonempty array");
  PiecewiseAffineLoss l{{}, c};
  for (std::size_t k = 0; k < arr.size(); ++k) {
    Fields p(arr[k], f.sub("pieces") + "[" + std::to_string(k) + "]");
    l.pieces.push_back({as_vector(p.get("a"), p.sub("a")), as_number(p.get("b"), p.sub("b"))});
    p.finish();
  }
  return l;
}

inline json pieces_json(const PiecewiseAffineLoss& l) {
  json a = json::array();
  for (const auto& p : l.pieces) a.push_back({{"a", p.a}, {"b", p.b}});
  return a;
}

}  // namespace detail

/// Tagged loss object; `m` is the sample dimension used for shape defaults.
inline Loss parse_loss(const json& j, const std::string& path, std::size_t m) {
  detail::Fields f(j, path);
  const std::string type = detail::as_string(f.get("type"), f.sub("type"));
  Loss out;
  if (type == "max_affine" || type == "min_affine") {
    out = detail::parse_pieces(f, type == "max_affine" ? Composition::Max : Composition::Min);
  } else if (type == "uq_worst" || type == "uq_best") {
    UqSet s{detail::as_matrix(f.get("A"), f.sub("A"), m), detail::as_vector(f.get("b"), f.sub("b")),
            type == "uq_worst" ? UqKind::Worst : UqKind::Best};
    out = std::move(s);
  } else if (type == "two_stage_objective") {
    TwoStageSpec s;
    s.variant = TwoStageVariant::ObjectiveUncertainty;
    s.Q = detail::as_matrix(f.get("Q"), f.sub("Q"), m);
    s.W = detail::as_matrix(f.get("W"), f.sub("W"));
    s.h = detail::as_vector(f.get("h"), f.sub("h"));
    out = std::move(s);
  } else if (type == "two_stage_rhs") {
    TwoStageSpec s;
    s.variant = TwoStageVariant::RhsUncertainty;
    s.W = detail::as_matrix(f.get("W"), f.sub("W"));
    s.h = detail::as_vector(f.get("h"), f.sub("h"));
    s.H = detail::as_matrix(f.get("H"), f.sub("H"), m);
    s.q = detail::as_vector(f.get("q"), f.sub("q"));
    out = std::move(s);
  } else if (type == "separable") {
    const json& arr = f.get("stages");
    if (!arr.is_array() || arr.empty()) fail(ErrorKind::ParseError, f.sub("stages") + ": expected a nonempty array");
    SeparableLoss s;
    for (std::size_t t = 0; t < arr.size(); ++t) {
      detail::Fields st(arr[t], f.sub("stages") + "[" + std::to_string(t) + "]");
      const std::size_t dim = detail::as_count(st.get("dim"), st.sub("dim"));
      Stage stage{detail::parse_pieces(st, Composition::Max), parse_support(st.get("support"), st.sub("support"), dim)};
      st.finish();
      s.stages.push_back(std::move(stage));
    }
    out = std::move(s);
  } else {
    fail(ErrorKind::ParseError, f.sub("type") + ": unknown loss type '" + type +
                                    "'; expected max_affine, min_affine, uq_worst, uq_best, two_stage_objective, "
                                    "two_stage_rhs or separable");
  }
  f.finish();
  return out;
}

inline json loss_json(const Loss& loss) {
  return std::visit(
      [](const auto& l) -> json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PiecewiseAffineLoss>) {
          return {{"type", l.composition == Composition::Max ? "max_affine" : "min_affine"},
                  {"pieces", detail::pieces_json(l)}};
        } else if constexpr (std::is_same_v<T, UqSet>) {
          return {{"type", l.kind == UqKind::Worst ? "uq_worst" : "uq_best"},
                  {"A", detail::matrix_json(l.A)},
                  {"b", l.b}};
        } else if constexpr (std::is_same_v<T, TwoStageSpec>) {
          if (l.variant == TwoStageVariant::ObjectiveUncertainty)
            return {{"type", "two_stage_objective"},
                    {"Q", detail::matrix_json(l.Q)},
                    {"W", detail::matrix_json(l.W)},
                    {"h", l.h}};
          return {{"type", "two_stage_rhs"},
                  {"W", detail::matrix_json(l.W)},
                  {"h", l.h},
                  {"H", detail::matrix_json(l.H)},
                  {"q", l.q}};
        } else {
          json st = json::array();
          for (const auto& s : l.stages)
            st.push_back({{"dim", s.support.m}, {"pieces", detail::pieces_json(s.loss)}, {"support", support_json(s.support)}});
          return {{"type", "separable"}, {"stages", st}};
        }
      },
      loss);
}

/// Relative CSV paths resolve against `base_dir`.
inline Dataset load_samples(const json& j, const std::string& path, const std::string& base_dir,
                            std::string* csv_path = nullptr) {
  if (j.is_string()) {
    const std::string p = j.get<std::string>();
    if (csv_path) *csv_path = p;
    std::filesystem::path full(p);
    if (full.is_relative() && !base_dir.empty()) full = std::filesystem::path(base_dir) / full;
    if (!std::filesystem::exists(full)) fail(ErrorKind::InvalidConfig, path + ": dataset file '" + p + "' not found");
    return read_csv_dataset(full.string());
  }
  if (!j.is_array() || j.empty()) fail(ErrorKind::ParseError, path + ": expected a nonempty array of samples or a CSV path");
  Dataset d;
  for (std::size_t i = 0; i < j.size(); ++i) d.push_back(detail::as_vector(j[i], path + "[" + std::to_string(i) + "]"));
  return d;
}

inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, source + ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::InvalidConfig, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_json_text(ss.str(), path);
}

inline void check_version(detail::Fields& f) {
  const json* v = f.optional("version");
  if (v && detail::as_count(*v, f.sub("version")) != static_cast<std::size_t>(kSpecVersion))
    fail(ErrorKind::ParseError, f.sub("version") + ": unsupported version (expected " + std::to_string(kSpecVersion) + ")");
}

inline ProblemSpecFile parse_problem_spec(const json& j, const std::string& base_dir = {}) {
  detail::Fields f(j, "");
  check_version(f);
  ProblemSpecFile out;
  out.problem.norm = parse_norm(f.get("norm"), "norm");
  out.problem.samples = load_samples(f.get("samples"), "samples", base_dir, &out.samples_path);
  const std::size_t m = out.problem.samples.front().size();
  out.problem.support = parse_support(f.get("support"), "support", m);
  out.problem.radius = detail::as_number(f.get("radius"), "radius");
  if (out.problem.radius < 0.0) fail(ErrorKind::ParseError, "radius: must be >= 0");
  out.problem.loss = parse_loss(f.get("loss"), "loss", m);
  f.finish();
  return out;
}

inline ProblemSpecFile read_problem_spec(const std::string& path) {
  return parse_problem_spec(read_json_file(path), std::filesystem::path(path).parent_path().string());
}

/// Canonical form: every key present; samples as the original CSV path when there was one.
inline json problem_spec_json(const ProblemSpecFile& s) {
  json j;
  j["version"] = s.version;
  j["norm"] = norm_json(s.problem.norm);
  j["support"] = support_json(s.problem.support);
  if (s.samples_path.empty())
    j["samples"] = s.problem.samples;
  else
    j["samples"] = s.samples_path;
  j["radius"] = s.problem.radius;
  j["loss"] = loss_json(s.problem.loss);
  return j;
}

// Results.

inline json number_json(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline json lp_stats_json(const LinearProgram& lp, const LpSolution& sol) {
  return {{"variables", lp.num_variables()},
          {"constraints", lp.num_constraints()},
          {"rows_used", sol.rows_used},
          {"iterations", sol.iterations}};
}

inline json worst_case_json(const WorstCaseResult& r) {
  json sol = json::object();
  if (r.solution.optimal()) {
    sol["lambda"] = r.solution.primal[r.model.lambda];
    Vector s;
    for (std::size_t i : r.model.s) s.push_back(r.solution.primal[i]);
    sol["s"] = s;
  }
  return {{"status", to_string(r.status)},
          {"value", number_json(r.value)},
          {"lp_stats", lp_stats_json(r.model.lp, r.solution)},
          {"solution", sol}};
}

inline json distribution_json(const DiscreteDistribution& d) {
  json a = json::array();
  for (const auto& at : d.atoms) a.push_back({{"point", at.point}, {"weight", at.weight}});
  return a;
}

inline json rays_json(const std::vector<EscapeRay>& rays) {
  json a = json::array();
  for (const auto& r : rays)
    a.push_back({{"sample", r.sample},
                 {"piece", r.piece},
                 {"stage", r.stage},
                 {"direction", r.direction},
                 {"slope", r.slope},
                 {"mass", r.mass}});
  return a;
}

inline json membership_json(const MembershipReport& m) {
  return {{"distance", m.distance},
          {"radius", m.radius},
          {"member", m.member},
          {"expected_loss", m.expected_loss},
          {"objective_value", m.objective_value}};
}

inline json extremal_json(const ExtremalResult& r) {
  return {{"objective_value", r.objective_value},
          {"retained_mass", r.retained_mass},
          {"escaping_mass", r.escaping_mass},
          {"budget_used", r.budget_used},
          {"atoms", distribution_json(r.distribution)},
          {"escape_rays", rays_json(r.escape_rays)}};
}

inline json extremal_json(const SeparableExtremalResult& r) {
  json marg = json::array();
  for (const auto& stages : r.marginals) {
    json row = json::array();
    for (const auto& d : stages) row.push_back(distribution_json(d));
    marg.push_back(row);
  }
  return {{"objective_value", r.objective_value},
          {"escaping_mass", r.escaping_mass},
          {"budget_used", r.budget_used},
          {"marginals", marg},
          {"escape_rays", rays_json(r.escape_rays)}};
}

inline json calibration_json(const CalibrationResult& r) {
  json table = json::array();
  for (const auto& t : r.table) table.push_back({{"epsilon", t.epsilon}, {"score", number_json(t.score)}});
  return {{"method", to_string(r.method)},
          {"radius", r.radius},
          {"table", table},
          {"fold_radii", r.fold_radii},
          {"folds", r.folds},
          {"split", r.split},
          {"seed", r.seed},
          {"permutation", r.permutation},
          {"decision", r.solution.decision},
          {"certificate", number_json(r.solution.certificate)}};
}

// Calibration and experiment configuration files.

/// Candidate grid: an explicit array or {"log": [lo, hi, n], "zero": bool}.
inline std::vector<double> parse_grid(const json& j, const std::string& path) {
  if (j.is_array()) return detail::as_vector(j, path);
  detail::Fields f(j, path);
  const Vector spec = detail::as_vector(f.get("log"), f.sub("log"));
  if (spec.size() != 3 || !(spec[0] > 0.0) || !(spec[1] > spec[0]) || spec[2] < 1.0 || spec[2] != std::floor(spec[2]))
    fail(ErrorKind::ParseError, f.sub("log") + ": expected [lo, hi, n] with 0 < lo < hi and integer n >= 1");
  auto g = log_grid(spec[0], spec[1], static_cast<std::size_t>(spec[2]));
  if (const json* z = f.optional("zero"); z && detail::as_bool(*z, f.sub("zero"))) g.insert(g.begin(), 0.0);
  f.finish();
  return g;
}

/// Parses the CLI --grid syntax: "a,b,c" or "log:lo:hi:n" with an optional "0," prefix.
inline std::vector<double> parse_grid_flag(const std::string& s) {
  std::vector<double> g;
  std::string rest = s;
  if (rest.rfind("0,log:", 0) == 0) {
    g.push_back(0.0);
    rest = rest.substr(2);
  }
  if (rest.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(rest.substr(4));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) fail(ErrorKind::ParseError, "--grid: expected log:lo:hi:n");
    const double n = parse_number(parts[2], "--grid n");
    if (n < 1.0 || n != std::floor(n)) fail(ErrorKind::ParseError, "--grid: n must be a positive integer");
    const auto lg = log_grid(parse_number(parts[0], "--grid lo"), parse_number(parts[1], "--grid hi"),
                             static_cast<std::size_t>(n));
    g.insert(g.end(), lg.begin(), lg.end());
    return g;
  }
  std::stringstream ss(rest);
  for (std::string p; std::getline(ss, p, ',');) g.push_back(parse_number(p, "--grid"));
  return g;
}

inline PortfolioSpec parse_portfolio(const json& j, const std::string& path) {
  detail::Fields f(j, path);
  PortfolioSpec s;
  if (const json* v = f.optional("m")) s.m = detail::as_count(*v, f.sub("m"));
  if (const json* v = f.optional("rho")) s.rho = detail::as_number(*v, f.sub("rho"));
  if (const json* v = f.optional("alpha")) s.alpha = detail::as_number(*v, f.sub("alpha"));
  if (const json* v = f.optional("norm")) s.ground_norm = parse_norm(*v, f.sub("norm"));
  s.support = Polytope::whole_space(s.m);
  if (const json* v = f.optional("support")) s.support = parse_support(*v, f.sub("support"), s.m);
  f.finish();
  s.validate();
  return s;
}

inline MarketModel parse_market(const json& j, const std::string& path) {
  detail::Fields f(j, path);
  MarketModel mk;
  if (const json* v = f.optional("m")) mk.m = detail::as_count(*v, f.sub("m"));
  if (const json* v = f.optional("systematic_scale")) mk.systematic_scale = detail::as_number(*v, f.sub("systematic_scale"));
  if (const json* v = f.optional("idiosyncratic_mean_step"))
    mk.idiosyncratic_mean_step = detail::as_number(*v, f.sub("idiosyncratic_mean_step"));
  if (const json* v = f.optional("idiosyncratic_scale_step"))
    mk.idiosyncratic_scale_step = detail::as_number(*v, f.sub("idiosyncratic_scale_step"));
  if (const json* v = f.optional("scale_interpretation")) {
    const std::string s = detail::as_string(*v, f.sub("scale_interpretation"));
    if (s == "stddev")
      mk.scale_interpretation = ScaleInterpretation::StdDev;
    else if (s == "variance")
      mk.scale_interpretation = ScaleInterpretation::Variance;
    else
      fail(ErrorKind::ParseError, f.sub("scale_interpretation") + ": expected \"stddev\" or \"variance\"");
  }
  f.finish();
  mk.validate();
  return mk;
}

/// Radius selection for the mean-CVaR portfolio or a UQ event on a given dataset.
struct CalibrateConfig {
  std::string method = "kfold";
  Dataset samples;
  std::string samples_path;
  PortfolioSpec portfolio;
  std::vector<double> grid = default_sweep_grid();
  std::size_t folds = 5;
  double split = 0.8;
  std::uint64_t seed = 1;
  /// UQ event for method "uq_kfold".
  std::optional<UqSet> safe_set;
  /// A-priori radius inputs.
  ConcentrationConfig concentration;
  double beta = 0.05;
};

inline CalibrateConfig parse_calibrate_config(const json& j, const std::string& base_dir = {}) {
  detail::Fields f(j, "");
  check_version(f);
  CalibrateConfig c;
  c.method = detail::as_string(f.get("method"), "method");
  if (c.method != "holdout" && c.method != "kfold" && c.method != "uq_kfold" && c.method != "a_priori")
    fail(ErrorKind::ParseError, "method: expected holdout, kfold, uq_kfold or a_priori");
  c.samples = load_samples(f.get("samples"), "samples", base_dir, &c.samples_path);
  const std::size_t m = c.samples.front().size();
  c.portfolio.m = m;
  c.portfolio.support = Polytope::whole_space(m);
  if (const json* v = f.optional("portfolio")) c.portfolio = parse_portfolio(*v, "portfolio");
  if (const json* v = f.optional("grid")) c.grid = parse_grid(*v, "grid");
  if (const json* v = f.optional("folds")) c.folds = detail::as_count(*v, "folds");
  if (const json* v = f.optional("split")) c.split = detail::as_number(*v, "split");
  if (const json* v = f.optional("seed")) c.seed = detail::as_seed(*v, "seed");
  if (const json* v = f.optional("safe_set")) {
    detail::Fields s(*v, "safe_set");
    c.safe_set = UqSet{detail::as_matrix(s.get("A"), "safe_set.A", m), detail::as_vector(s.get("b"), "safe_set.b"),
                       UqKind::Best};
    s.finish();
    c.safe_set->validate(m);
  }
  if (const json* v = f.optional("concentration")) {
    detail::Fields s(*v, "concentration");
    if (const json* x = s.optional("c1")) c.concentration.c1 = detail::as_number(*x, "concentration.c1");
    if (const json* x = s.optional("c2")) c.concentration.c2 = detail::as_number(*x, "concentration.c2");
    if (const json* x = s.optional("a")) c.concentration.a = detail::as_number(*x, "concentration.a");
    s.finish();
  }
  c.concentration.m = m;
  if (const json* v = f.optional("beta")) c.beta = detail::as_number(*v, "beta");
  f.finish();
  if (c.method == "uq_kfold" && !c.safe_set) fail(ErrorKind::ParseError, "safe_set: required for method uq_kfold");
  return c;
}

/// Experiment file: {"study": "portfolio" | "uq", ...}; omitted fields keep the desk-scale defaults.
struct ExperimentConfig {
  std::string study = "portfolio";
  PortfolioStudyConfig portfolio;
  UqStudyConfig uq;
};

inline ExperimentConfig parse_experiment_config(const json& j) {
  detail::Fields f(j, "");
  check_version(f);
  ExperimentConfig e;
  e.study = detail::as_string(f.get("study"), "study");
  if (e.study != "portfolio" && e.study != "uq") fail(ErrorKind::ParseError, "study: expected \"portfolio\" or \"uq\"");
  const bool uq = e.study == "uq";
  auto sizes = uq ? &e.uq.sample_sizes : &e.portfolio.sample_sizes;
  auto runs = uq ? &e.uq.runs : &e.portfolio.runs;
  auto seed = uq ? &e.uq.seed : &e.portfolio.seed;
  auto folds = uq ? &e.uq.folds : &e.portfolio.folds;
  auto threads = uq ? &e.uq.threads : &e.portfolio.threads;
  auto sweep = uq ? &e.uq.sweep : &e.portfolio.sweep;
  auto sweep_grid = uq ? &e.uq.sweep_grid : &e.portfolio.sweep_grid;
  auto calib_grid = uq ? &e.uq.calibration_grid : &e.portfolio.calibration_grid;
  auto spec = uq ? &e.uq.spec : &e.portfolio.spec;
  auto market = uq ? &e.uq.market : &e.portfolio.market;
  if (const json* v = f.optional("sample_sizes")) *sizes = detail::as_counts(*v, "sample_sizes");
  if (const json* v = f.optional("runs")) *runs = detail::as_count(*v, "runs");
  if (const json* v = f.optional("seed")) *seed = detail::as_seed(*v, "seed");
  if (const json* v = f.optional("folds")) *folds = detail::as_count(*v, "folds");
  if (const json* v = f.optional("threads")) *threads = detail::as_count(*v, "threads");
  if (const json* v = f.optional("sweep")) *sweep = detail::as_bool(*v, "sweep");
  if (const json* v = f.optional("sweep_grid")) *sweep_grid = parse_grid(*v, "sweep_grid");
  if (const json* v = f.optional("calibration_grid")) *calib_grid = parse_grid(*v, "calibration_grid");
  if (const json* v = f.optional("portfolio")) *spec = parse_portfolio(*v, "portfolio");
  if (const json* v = f.optional("market")) *market = parse_market(*v, "market");
  if (uq) {
    if (const json* v = f.optional("portfolio_grid")) e.uq.portfolio_grid = parse_grid(*v, "portfolio_grid");
    if (const json* v = f.optional("calibrate")) e.uq.calibrate = detail::as_bool(*v, "calibrate");
    if (const json* v = f.optional("benchmark_assets")) e.uq.benchmark_assets = detail::as_counts(*v, "benchmark_assets");
  } else {
    if (const json* v = f.optional("holdout")) e.portfolio.holdout = detail::as_bool(*v, "holdout");
    if (const json* v = f.optional("kfold")) e.portfolio.kfold = detail::as_bool(*v, "kfold");
    if (const json* v = f.optional("split")) e.portfolio.split = detail::as_number(*v, "split");
  }
  f.finish();
  return e;
}

}  // namespace wdro
