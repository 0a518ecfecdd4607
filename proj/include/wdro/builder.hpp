#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wdro/geometry.hpp"
#include "wdro/lp.hpp"

namespace wdro {

/// Sparse affine expression Σ cⱼ xⱼ + constant over LP variables.
struct LinExpr {
  std::vector<std::pair<std::size_t, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}

  static LinExpr var(std::size_t v, double coef = 1.0) {
    LinExpr e;
    e.add(v, coef);
    return e;
  }

  LinExpr& add(std::size_t v, double coef) {
    if (coef != 0.0) terms.emplace_back(v, coef);
    return *this;
  }

  LinExpr& add(const LinExpr& other, double scale = 1.0) {
    if (scale == 0.0) return *this;
    for (const auto& [v, c] : other.terms) add(v, scale * c);
    constant += scale * other.constant;
    return *this;
  }

  /// Merges repeated variables and drops zeros.
  LinExpr& normalize() {
    std::sort(terms.begin(), terms.end());
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& t : terms) {
      if (!out.empty() && out.back().first == t.first)
        out.back().second += t.second;
      else
        out.push_back(t);
    }
    std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
    terms = std::move(out);
    return *this;
  }

  bool is_constant() const { return terms.empty(); }
};

enum class LazyMode { Auto, Always, Never };

struct BuildOptions {
  /// Dual-norm rows can be generated on demand by the solver; Auto enables this when they dominate the program.
  LazyMode lazy_norm_rows = LazyMode::Auto;
  bool variable_names = true;
};

/// Assembles a LinearProgram from sparse rows.
class LpBuilder {
 public:
  explicit LpBuilder(Sense sense = Sense::Minimize, BuildOptions opts = {}) : opts_(opts) { lp_.sense = sense; }

  std::size_t var(double cost, double lo, double up, const std::string& name = {}) {
    lp_.costs.push_back(cost);
    lp_.lower.push_back(lo);
    lp_.upper.push_back(up);
    if (opts_.variable_names) names_.push_back(name);
    return lp_.costs.size() - 1;
  }

  void set_cost(std::size_t v, double c) { lp_.costs[v] = c; }
  double lower(std::size_t v) const { return lp_.lower[v]; }
  std::size_t num_variables() const { return lp_.costs.size(); }

  /// expr rel rhs
  void row(const LinExpr& expr, Relation rel, double rhs = 0.0) { push(expr, rel, rhs, false, -1); }

  /// ‖v‖_* ≤ λ where ‖·‖ is the ground norm, linearized exactly.
  void dual_norm_at_most(std::vector<LinExpr> v, std::size_t lambda, GroundNorm ground) {
    for (auto& e : v) e.normalize();
    if (!seen_.insert(key(v, lambda)).second) return;

    const GroundNorm dn = dual(ground);
    if (std::all_of(v.begin(), v.end(), [](const LinExpr& e) { return e.is_constant(); })) {
      Vector c(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) c[j] = v[j].constant;
      push(LinExpr::var(lambda), Relation::GreaterEqual, norm_value(c, dn), false, -1);
      return;
    }
    if (auto single = common_nonnegative_variable(v)) {
      Vector c(v.size(), 0.0);
      for (std::size_t j = 0; j < v.size(); ++j)
        if (!v[j].terms.empty()) c[j] = v[j].terms.front().second;
      LinExpr e = LinExpr::var(*single, norm_value(c, dn));
      e.add(lambda, -1.0);
      push(e, Relation::LessEqual, 0.0, false, -1);
      return;
    }
    const int group = next_group_++;
    if (ground == GroundNorm::One) {
      for (const auto& vj : v) {
        if (vj.is_constant() && vj.constant == 0.0) continue;
        for (double s : {1.0, -1.0}) {
          LinExpr e;
          e.add(vj, s);
          e.add(lambda, -1.0);
          push(e, Relation::LessEqual, 0.0, true, group);
        }
      }
    } else {
      LinExpr total;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j].is_constant() && v[j].constant == 0.0) continue;
        const std::size_t u = var(0.0, 0.0, kInf, opts_.variable_names ? "u" + std::to_string(lp_.costs.size()) : "");
        total.add(u, 1.0);
        for (double s : {1.0, -1.0}) {
          LinExpr e;
          e.add(v[j], s);
          e.add(u, -1.0);
          push(e, Relation::LessEqual, 0.0, true, group);
        }
      }
      total.add(lambda, -1.0);
      push(total, Relation::LessEqual, 0.0, false, -1);
    }
  }

  LinearProgram build() && {
    const std::size_t n = lp_.costs.size();
    std::size_t lazy = 0;
    for (const auto& r : rows_) lazy += r.lazy ? 1 : 0;
    const std::size_t eager = rows_.size() - lazy;
    bool keep_lazy = opts_.lazy_norm_rows == LazyMode::Always ||
                     (opts_.lazy_norm_rows == LazyMode::Auto && lazy > 2 * eager && lazy > 64);
    lp_.constraints.reserve(rows_.size());
    for (auto& r : rows_) {
      Constraint c{Vector(n, 0.0), r.rel, r.rhs};
      for (const auto& [v, coef] : r.expr.terms) c.coefficients[v] += coef;
      c.lazy = keep_lazy && r.lazy;
      c.group = c.lazy ? r.group : -1;
      lp_.constraints.push_back(std::move(c));
    }
    rows_.clear();
    if (opts_.variable_names) lp_.names = std::move(names_);
    return std::move(lp_);
  }

 private:
  struct PendingRow {
    LinExpr expr;
    Relation rel;
    double rhs;
    bool lazy;
    int group;
  };

  void push(LinExpr expr, Relation rel, double rhs, bool lazy, int group) {
    rhs -= expr.constant;
    expr.constant = 0.0;
    expr.normalize();
    rows_.push_back({std::move(expr), rel, rhs, lazy, group});
  }

  std::optional<std::size_t> common_nonnegative_variable(const std::vector<LinExpr>& v) const {
    std::optional<std::size_t> var_id;
    for (const auto& e : v) {
      if (e.constant != 0.0 || e.terms.size() > 1) return std::nullopt;
      if (e.terms.empty()) continue;
      if (var_id && *var_id != e.terms.front().first) return std::nullopt;
      var_id = e.terms.front().first;
    }
    if (var_id && lp_.lower[*var_id] >= 0.0) return var_id;
    return std::nullopt;
  }

  static std::vector<double> key(const std::vector<LinExpr>& v, std::size_t lambda) {
    std::vector<double> k{static_cast<double>(lambda)};
    for (const auto& e : v) {
      k.push_back(static_cast<double>(e.terms.size()));
      k.push_back(e.constant);
      for (const auto& [var_id, c] : e.terms) {
        k.push_back(static_cast<double>(var_id));
        k.push_back(c);
      }
    }
    return k;
  }

  BuildOptions opts_;
  LinearProgram lp_;
  std::vector<std::string> names_;
  std::vector<PendingRow> rows_;
  std::set<std::vector<double>> seen_;
  int next_group_ = 0;
};

}  // namespace wdro
