#pragma once

// Bounded-variable two-phase primal simplex on a dense tableau.
// Included from lp.hpp; relies on Constraint, SolverConfig and LpStatus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace wdro::detail {

struct SimplexResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  Vector y;
  Vector reduced;
  Vector ray;
  std::size_t iterations = 0;
};

class Simplex {
 public:
  Simplex(const std::vector<const Constraint*>& rows, const Vector& cost, const Vector& lower, const Vector& upper,
          const SolverConfig& cfg)
      : rows_(rows), cfg_(cfg), m_(rows.size()), n_(cost.size()), c_(cost) {
    init(lower, upper);
  }

  SimplexResult run() {
    SimplexResult out;
    if (n_art_ > 0) {
      Vector phase1(ncols_, 0.0);
      for (std::size_t k = 0; k < n_art_; ++k) phase1[art_begin() + k] = 1.0;
      set_costs(phase1);
      const LpStatus s = iterate();
      (void)s;  // phase 1 is bounded below by zero
      refresh_values();
      double infeas = 0.0;
      for (std::size_t k = 0; k < n_art_; ++k) infeas += value_[art_begin() + k];
      if (infeas > cfg_.feas_tol * std::max(1.0, rhs_scale_)) {
        out.status = LpStatus::Infeasible;
        out.x.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
        out.iterations = iterations_;
        return out;
      }
      drive_out_artificials();
    }
    Vector phase2(ncols_, 0.0);
    std::copy(c_.begin(), c_.end(), phase2.begin());
    set_costs(phase2);
    const LpStatus s = iterate();
    out.iterations = iterations_;
    out.x.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
    if (s == LpStatus::Unbounded) {
      out.status = LpStatus::Unbounded;
      out.ray = ray_;
      return out;
    }
    out.status = LpStatus::Optimal;
    out.y.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) out.y[r] = -d_[n_ + r];
    out.reduced.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      if (where_[j] < 0) out.reduced[j] = d_[j];
    return out;
  }

 private:
  enum class State : unsigned char { Basic, AtLower, AtUpper, Free };

  std::size_t art_begin() const { return n_ + m_; }
  double& t(std::size_t i, std::size_t j) { return tab_[i * ncols_ + j]; }
  double t(std::size_t i, std::size_t j) const { return tab_[i * ncols_ + j]; }

  void init(const Vector& lower, const Vector& upper) {
    // Logical column n+r carries coefficient +1 in row r with bounds reflecting the relation.
    lo_.assign(n_ + m_, 0.0);
    up_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      up_[j] = upper[j];
    }
    for (std::size_t r = 0; r < m_; ++r) {
      const Relation rel = rows_[r]->relation;
      lo_[n_ + r] = rel == Relation::GreaterEqual ? -kInf : 0.0;
      up_[n_ + r] = rel == Relation::LessEqual ? kInf : 0.0;
      rhs_scale_ = std::max(rhs_scale_, std::abs(rows_[r]->rhs));
    }
    value_.assign(n_ + m_, 0.0);
    state_.assign(n_ + m_, State::Free);
    for (std::size_t j = 0; j < n_; ++j) place_at_bound(j);

    std::vector<double> residual(m_);
    std::vector<char> needs_art(m_, 0);
    for (std::size_t r = 0; r < m_; ++r) {
      double act = 0.0;
      const auto& a = rows_[r]->coefficients;
      for (std::size_t j = 0; j < n_; ++j)
        if (value_[j] != 0.0) act += a[j] * value_[j];
      residual[r] = rows_[r]->rhs - act;
      if (residual[r] < lo_[n_ + r] || residual[r] > up_[n_ + r]) {
        needs_art[r] = 1;
        art_row_.push_back(r);
        art_sign_.push_back(residual[r] > 0 ? 1.0 : -1.0);
      }
    }
    n_art_ = art_row_.size();
    ncols_ = n_ + m_ + n_art_;
    lo_.resize(ncols_, 0.0);
    up_.resize(ncols_, kInf);
    value_.resize(ncols_, 0.0);
    state_.resize(ncols_, State::AtLower);
    where_.assign(ncols_, -1);
    basis_.assign(m_, 0);
    tab_.assign(m_ * ncols_, 0.0);

    std::size_t k = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      const auto& a = rows_[r]->coefficients;
      double sgn = 1.0;
      if (needs_art[r]) {
        sgn = art_sign_[k];
        const std::size_t col = art_begin() + k;
        t(r, col) = 1.0;
        set_basic(r, col, std::abs(residual[r]));
        value_[n_ + r] = 0.0;
        state_[n_ + r] = State::AtLower;
        if (lo_[n_ + r] == -kInf) state_[n_ + r] = State::AtUpper;
        ++k;
      } else {
        set_basic(r, n_ + r, residual[r]);
      }
      for (std::size_t j = 0; j < n_; ++j) t(r, j) = sgn * a[j];
      t(r, n_ + r) = sgn;
    }
  }

  void place_at_bound(std::size_t j) {
    if (lo_[j] != -kInf) {
      state_[j] = State::AtLower;
      value_[j] = lo_[j];
    } else if (up_[j] != kInf) {
      state_[j] = State::AtUpper;
      value_[j] = up_[j];
    } else {
      state_[j] = State::Free;
      value_[j] = 0.0;
    }
  }

  void set_basic(std::size_t row, std::size_t col, double v) {
    basis_[row] = col;
    where_[col] = static_cast<long>(row);
    state_[col] = State::Basic;
    value_[col] = v;
  }

  void set_costs(const Vector& cost) {
    cost_ = cost;
    refresh_reduced_costs();
  }

  // d_j = c_j − yᵀA_j with yᵀ = c_Bᵀ B⁻¹; B⁻¹ is read from the logical columns.
  void refresh_reduced_costs() {
    Vector y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * ncols_ + n_];
      for (std::size_t r = 0; r < m_; ++r) y[r] += cb * row[r];
    }
    d_.assign(ncols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) d_[j] = cost_[j];
    for (std::size_t r = 0; r < m_; ++r) {
      if (y[r] == 0.0) continue;
      const auto& a = rows_[r]->coefficients;
      for (std::size_t j = 0; j < n_; ++j) d_[j] -= y[r] * a[j];
    }
    for (std::size_t r = 0; r < m_; ++r) d_[n_ + r] = cost_[n_ + r] - y[r];
    for (std::size_t k = 0; k < n_art_; ++k)
      d_[art_begin() + k] = cost_[art_begin() + k] - art_sign_[k] * y[art_row_[k]];
    for (std::size_t i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  // x_B = B⁻¹ (b − N x_N).
  void refresh_values() {
    Vector w(m_);
    for (std::size_t r = 0; r < m_; ++r) w[r] = rows_[r]->rhs;
    for (std::size_t r = 0; r < m_; ++r) {
      const auto& a = rows_[r]->coefficients;
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j)
        if (state_[j] != State::Basic) s += a[j] * value_[j];
      w[r] -= s;
    }
    for (std::size_t j = n_; j < ncols_; ++j) {
      if (state_[j] == State::Basic || value_[j] == 0.0) continue;
      if (j < n_ + m_) {
        w[j - n_] -= value_[j];
      } else {
        w[art_row_[j - art_begin()]] -= art_sign_[j - art_begin()] * value_[j];
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &tab_[i * ncols_ + n_];
      double s = 0.0;
      for (std::size_t r = 0; r < m_; ++r) s += row[r] * w[r];
      value_[basis_[i]] = s;
    }
  }

  bool bland() const { return iterations_ >= cfg_.bland_factor * (n_ + m_); }

  // Returns the entering column and direction (+1 increase, −1 decrease); ncols_ when optimal.
  std::size_t choose_entering(int& dir) const {
    const double tol = cfg_.optimality_tol;
    std::size_t best = ncols_;
    double best_score = 0.0;
    const bool use_bland = bland();
    for (std::size_t j = 0; j < ncols_; ++j) {
      const State s = state_[j];
      if (s == State::Basic || lo_[j] == up_[j]) continue;
      const double dj = d_[j];
      int dj_dir = 0;
      if (s == State::AtLower && dj < -tol) dj_dir = 1;
      else if (s == State::AtUpper && dj > tol) dj_dir = -1;
      else if (s == State::Free) dj_dir = dj < -tol ? 1 : (dj > tol ? -1 : 0);
      if (dj_dir == 0) continue;
      if (use_bland) {
        dir = dj_dir;
        return j;
      }
      if (std::abs(dj) > best_score) {
        best_score = std::abs(dj);
        best = j;
        dir = dj_dir;
      }
    }
    return best;
  }

  struct Step {
    std::size_t row;  // m_ means bound flip, m_+1 means unbounded
    double length;
    bool to_upper;
  };

  Step ratio_test(std::size_t q, int dir) const {
    const double ptol = cfg_.pivot_tol;
    const double ftol = cfg_.feas_tol;
    const double flip = (lo_[q] != -kInf && up_[q] != kInf) ? up_[q] - lo_[q] : kInf;
    const bool use_bland = bland();

    // Harris pass 1: largest step keeping every basic within its bound relaxed by ftol.
    double relaxed = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = t(i, q);
      if (std::abs(a) <= ptol) continue;
      const std::size_t b = basis_[i];
      const double rate = -dir * a;
      double lim = kInf;
      if (rate < 0 && lo_[b] != -kInf) lim = (value_[b] - lo_[b] + (use_bland ? 0.0 : ftol)) / -rate;
      if (rate > 0 && up_[b] != kInf) lim = (up_[b] - value_[b] + (use_bland ? 0.0 : ftol)) / rate;
      relaxed = std::min(relaxed, std::max(lim, 0.0));
    }
    if (relaxed == kInf && flip == kInf) return {m_ + 1, kInf, false};
    if (flip <= relaxed) return {m_, flip, false};

    // Pass 2: among rows whose exact ratio is within the relaxed step, prefer the largest pivot.
    std::size_t best = m_;
    double best_mag = 0.0, best_len = kInf;
    bool best_upper = false;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = t(i, q);
      if (std::abs(a) <= ptol) continue;
      const std::size_t b = basis_[i];
      const double rate = -dir * a;
      double lim = kInf;
      bool upper = false;
      if (rate < 0 && lo_[b] != -kInf) lim = (value_[b] - lo_[b]) / -rate;
      if (rate > 0 && up_[b] != kInf) {
        lim = (up_[b] - value_[b]) / rate;
        upper = true;
      }
      if (lim == kInf) continue;
      lim = std::max(lim, 0.0);
      if (use_bland) {
        if (best == m_ || lim < best_len - 1e-15 ||
            (lim <= best_len + 1e-15 && basis_[i] < basis_[best])) {
          best = i;
          best_len = lim;
          best_upper = upper;
        }
      } else if (lim <= relaxed && std::abs(a) > best_mag) {
        best = i;
        best_mag = std::abs(a);
        best_len = lim;
        best_upper = upper;
      }
    }
    if (best == m_) return {m_ + 1, kInf, false};
    return {best, best_len, best_upper};
  }

  void pivot(std::size_t p, std::size_t q) {
    double* prow = &tab_[p * ncols_];
    const double inv = 1.0 / prow[q];
    nz_.clear();
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (prow[j] == 0.0) continue;
      prow[j] *= inv;
      if (std::abs(prow[j]) < cfg_.zero_tol) {
        prow[j] = 0.0;
        continue;
      }
      nz_.push_back(j);
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == p) continue;
      double* row = &tab_[i * ncols_];
      const double f = row[q];
      if (f == 0.0) continue;
      for (std::size_t j : nz_) {
        double v = row[j] - f * prow[j];
        if (std::abs(v) < cfg_.zero_tol) v = 0.0;
        row[j] = v;
      }
      row[q] = 0.0;
    }
    const double f = d_[q];
    if (f != 0.0) {
      for (std::size_t j : nz_) d_[j] -= f * prow[j];
      d_[q] = 0.0;
    }
    const std::size_t leaving = basis_[p];
    where_[leaving] = -1;
    basis_[p] = q;
    where_[q] = static_cast<long>(p);
    state_[q] = State::Basic;
  }

  LpStatus iterate() {
    const std::size_t cap = cfg_.iteration_factor * (n_ + m_) + 1000;
    bool refreshed = false;
    for (;;) {
      int dir = 0;
      const std::size_t q = choose_entering(dir);
      if (q == ncols_) {
        if (refreshed) return LpStatus::Optimal;
        refresh_values();
        refresh_reduced_costs();
        refreshed = true;
        continue;
      }
      refreshed = false;
      if (++iterations_ > cap) fail(ErrorKind::NumericalBreakdown, "simplex iteration limit exceeded");
      const Step st = ratio_test(q, dir);
      if (st.row == m_ + 1) {
        build_ray(q, dir);
        return LpStatus::Unbounded;
      }
      const double len = st.length;
      if (len != 0.0) {
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = t(i, q);
          if (a != 0.0) value_[basis_[i]] -= dir * a * len;
        }
      }
      if (st.row == m_) {
        value_[q] = dir > 0 ? up_[q] : lo_[q];
        state_[q] = dir > 0 ? State::AtUpper : State::AtLower;
        continue;
      }
      const double entering_value = value_[q] + dir * len;
      const std::size_t leaving = basis_[st.row];
      pivot(st.row, q);
      value_[q] = entering_value;
      if (lo_[leaving] == up_[leaving]) {
        value_[leaving] = lo_[leaving];
        state_[leaving] = State::AtLower;
      } else if (st.to_upper) {
        value_[leaving] = up_[leaving];
        state_[leaving] = State::AtUpper;
      } else {
        value_[leaving] = lo_[leaving];
        state_[leaving] = State::AtLower;
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t b = basis_[i];
      if (b < art_begin()) continue;
      std::size_t best = ncols_;
      double mag = cfg_.pivot_tol;
      for (std::size_t j = 0; j < art_begin(); ++j) {
        if (state_[j] == State::Basic) continue;
        if (std::abs(t(i, j)) > mag) {
          mag = std::abs(t(i, j));
          best = j;
        }
      }
      if (best == ncols_) continue;  // redundant row; the artificial stays basic at zero
      const double v = value_[best];
      value_[b] = 0.0;
      pivot(i, best);
      value_[best] = v;
      state_[b] = State::AtLower;
    }
    for (std::size_t k = 0; k < n_art_; ++k) {
      const std::size_t col = art_begin() + k;
      up_[col] = 0.0;
      if (state_[col] != State::Basic) {
        value_[col] = 0.0;
        state_[col] = State::AtLower;
      }
    }
    refresh_values();
  }

  void build_ray(std::size_t q, int dir) {
    ray_.assign(n_, 0.0);
    if (q < n_) ray_[q] = dir;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) ray_[basis_[i]] = -dir * t(i, q);
    const double scale = max_abs(ray_);
    if (scale > 0)
      for (double& v : ray_) v /= scale;
    verify_ray();
  }

  void verify_ray() const {
    const double tol = 1e-7;
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      obj += c_[j] * ray_[j];
      if (lo_[j] != -kInf && ray_[j] < -tol) fail(ErrorKind::NumericalBreakdown, "unbounded ray violates a bound");
      if (up_[j] != kInf && ray_[j] > tol) fail(ErrorKind::NumericalBreakdown, "unbounded ray violates a bound");
    }
    for (std::size_t r = 0; r < m_; ++r) {
      const double a = dot(rows_[r]->coefficients, ray_);
      const Relation rel = rows_[r]->relation;
      if ((rel == Relation::LessEqual && a > tol) || (rel == Relation::GreaterEqual && a < -tol) ||
          (rel == Relation::Equal && std::abs(a) > tol))
        fail(ErrorKind::NumericalBreakdown, "unbounded ray violates the recession system");
    }
    if (!(obj < 0)) fail(ErrorKind::NumericalBreakdown, "unbounded ray does not improve the objective");
  }

  const std::vector<const Constraint*>& rows_;
  const SolverConfig& cfg_;
  std::size_t m_;
  std::size_t n_;
  Vector c_;
  std::size_t ncols_ = 0;
  std::size_t n_art_ = 0;
  std::vector<std::size_t> art_row_;
  std::vector<double> art_sign_;
  std::vector<double> tab_;
  std::vector<std::size_t> basis_;
  std::vector<long> where_;
  std::vector<State> state_;
  Vector value_, lo_, up_, cost_, d_;
  Vector ray_;
  std::vector<std::size_t> nz_;
  std::size_t iterations_ = 0;
  double rhs_scale_ = 0.0;
};

}  // namespace wdro::detail
