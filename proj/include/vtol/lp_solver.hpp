#ifndef VTOL_LP_SOLVER_HPP_
#define VTOL_LP_SOLVER_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtol/error.hpp"
#include "vtol/model.hpp"

namespace vtol {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

struct LpOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-9;
  long max_iterations = 0;  // 0 selects 50 * (rows + columns) + 1000
  int stall_limit = 50;     // degenerate pivots in a row before perturbing
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
};

namespace detail {

// Dense bounded-variable primal simplex on a full tableau.
//
// Structural columns are shifted to a zero lower bound (free variables are
// split). Each row gets a slack or an artificial so the start basis is the
// identity; the tableau columns of that start basis therefore hold B^-1,
// which lets basic values be recomputed exactly from the original rhs.
//
// Pricing is Dantzig with lowest-index ties. The ratio test is Harris's
// two-pass rule, preferring large pivots. When a run of degenerate pivots
// stalls, basic values are nudged off their bounds by fixed deterministic
// amounts; the nudge is removed at the end of the phase and any residual
// primal infeasibility is repaired with dual simplex pivots.
class DenseSimplex {
 public:
  DenseSimplex(const MilpModel& m, const std::vector<double>& lower,
               const std::vector<double>& upper, const LpOptions& opt)
      : model_(&m), opt_(opt) {
    build(lower, upper);
  }

  LpSolution solve() {
    LpSolution out;
    if (trivially_infeasible_) return out;
    budget_ = opt_.max_iterations > 0 ? opt_.max_iterations : 50L * (rows_ + cols_) + 1000;

    if (num_artificial_ > 0) {
      std::vector<double> phase1(cols_, 0.0);
      for (int c = first_artificial_; c < cols_; ++c) phase1[c] = 1.0;
      set_costs(phase1);
      if (run_phase(false) != PhaseResult::kOptimal) {
        throw NumericalError("phase one did not terminate at an optimum");
      }
      double infeas = 0.0;
      for (int r = 0; r < rows_; ++r) {
        if (basis_[r] >= first_artificial_) infeas += std::max(0.0, beta_[r]);
      }
      if (infeas > opt_.feas_tol * rhs_scale_) {
        out.iterations = iterations_;
        return out;
      }
      for (int c = first_artificial_; c < cols_; ++c) upper_[c] = 0.0;
      drive_out_artificials();
    }

    set_costs(cost_);
    return finish(run_phase(true));
  }

  std::size_t bytes() const { return tab_.size() * sizeof(double); }

  // Re-solves after changing the bounds of model variable j, starting from
  // the optimal basis of the previous solve. The basis stays dual feasible,
  // so dual simplex pivots restore primal feasibility.
  LpSolution resolve_with_bounds(int j, double lo, double hi) {
    Mapping& mp = map_[j];
    if (mp.neg_col >= 0 || mp.sign < 0.0 || !std::isfinite(lo) || !std::isfinite(hi) ||
        lo > hi + opt_.feas_tol) {
      throw std::invalid_argument("warm bound change needs a finite box");
    }
    const int c = mp.col;
    const double move = lo - mp.shift;
    if (move != 0.0) {
      for (auto [r, a] : orig_col_[c]) rhs_[r] -= a * move;
    }
    mp.shift = lo;
    upper_[c] = std::max(0.0, hi - lo);
    if (upper_[c] == 0.0) at_upper_[c] = 0;
    iterations_ = 0;
    perturbed_ = false;
    recompute_beta();
    if (!dual_cleanup()) return {};
    return finish(run_phase(true));
  }

 private:
  enum class PhaseResult { kOptimal, kUnbounded, kInfeasible };

  LpSolution finish(PhaseResult r) {
    LpSolution out;
    out.iterations = iterations_;
    if (r == PhaseResult::kUnbounded) {
      out.status = LpStatus::kUnbounded;
      return out;
    }
    if (r == PhaseResult::kInfeasible) return out;
    out.status = LpStatus::kOptimal;
    out.x = primal();
    out.objective = model_->evaluate_objective(out.x);
    return out;
  }

  struct Mapping {
    int col = -1;
    int neg_col = -1;  // second half of a split free variable
    double shift = 0.0;
    double sign = 1.0;
  };

  static constexpr double kPivotTol = 1e-9;

  void build(const std::vector<double>& lower, const std::vector<double>& upper) {
    const int n = model_->num_variables();
    map_.assign(n, {});
    for (int j = 0; j < n; ++j) {
      double lo = lower[j], hi = upper[j];
      if (lo > hi + opt_.feas_tol) {
        trivially_infeasible_ = true;
        return;
      }
      Mapping& mp = map_[j];
      double c = model_->objective[j];
      if (std::isfinite(lo)) {
        mp = {add_col(c, std::isfinite(hi) ? std::max(0.0, hi - lo) : kInfinity), -1, lo, 1.0};
      } else if (std::isfinite(hi)) {
        mp = {add_col(-c, kInfinity), -1, hi, -1.0};
      } else {
        mp.col = add_col(c, kInfinity);
        mp.neg_col = add_col(-c, kInfinity);
      }
    }

    const int m = model_->num_constraints();
    rows_ = m;
    std::vector<std::vector<std::pair<int, double>>> row_terms(m);
    std::vector<double> rhs(m);
    std::vector<int> slack_sign(m, 0);
    rhs_scale_ = 1.0;
    for (int i = 0; i < m; ++i) {
      const Constraint& con = model_->constraints[i];
      double b = con.rhs;
      for (const Term& t : con.terms) {
        const Mapping& mp = map_[t.var];
        b -= t.coef * mp.shift;
        row_terms[i].push_back({mp.col, t.coef * mp.sign});
        if (mp.neg_col >= 0) row_terms[i].push_back({mp.neg_col, -t.coef});
      }
      if (con.relation == Relation::kLessEqual) slack_sign[i] = 1;
      if (con.relation == Relation::kGreaterEqual) slack_sign[i] = -1;
      rhs[i] = b;
      rhs_scale_ = std::max(rhs_scale_, std::abs(b));
    }
    std::vector<int> slack_col(m, -1);
    for (int i = 0; i < m; ++i) {
      if (slack_sign[i] != 0) slack_col[i] = add_col(0.0, kInfinity);
    }
    first_artificial_ = static_cast<int>(cost_.size());
    std::vector<int> art_col(m, -1);
    std::vector<double> row_sign(m, 1.0);
    for (int i = 0; i < m; ++i) {
      if (rhs[i] < 0.0) row_sign[i] = -1.0;
      bool slack_fits = slack_sign[i] != 0 && slack_sign[i] * row_sign[i] > 0;
      if (!slack_fits) art_col[i] = add_col(0.0, kInfinity);
    }
    cols_ = static_cast<int>(cost_.size());
    num_artificial_ = cols_ - first_artificial_;

    tab_.assign(static_cast<std::size_t>(rows_) * cols_, 0.0);
    beta_.assign(rows_, 0.0);
    basis_.assign(rows_, -1);
    start_col_.assign(rows_, -1);
    rhs_.assign(rows_, 0.0);
    at_upper_.assign(cols_, 0);
    is_basic_.assign(cols_, 0);
    orig_col_.assign(first_artificial_, {});
    for (int i = 0; i < m; ++i) {
      double s = row_sign[i];
      double* row = &tab_[static_cast<std::size_t>(i) * cols_];
      for (auto [c, a] : row_terms[i]) {
        row[c] += s * a;
        orig_col_[c].push_back({i, s * a});
      }
      if (slack_col[i] >= 0) row[slack_col[i]] = s * slack_sign[i];
      rhs_[i] = s * rhs[i];
      beta_[i] = rhs_[i];
      int b = art_col[i] >= 0 ? art_col[i] : slack_col[i];
      row[b] = 1.0;
      basis_[i] = b;
      start_col_[i] = b;
      is_basic_[b] = 1;
    }
  }

  int add_col(double cost, double upper) {
    cost_.push_back(cost);
    upper_.push_back(upper);
    return static_cast<int>(cost_.size()) - 1;
  }

  double* row(int r) { return &tab_[static_cast<std::size_t>(r) * cols_]; }
  const double* row(int r) const { return &tab_[static_cast<std::size_t>(r) * cols_]; }

  void set_costs(const std::vector<double>& c) {
    red_.assign(c.begin(), c.end());
    for (int r = 0; r < rows_; ++r) {
      double cb = c[basis_[r]];
      if (cb == 0.0) continue;
      const double* tr = row(r);
      for (int k = 0; k < cols_; ++k) red_[k] -= cb * tr[k];
    }
  }

  // beta = B^-1 b - sum over nonbasics at upper of B^-1 a_c u_c.
  void recompute_beta() {
    std::vector<int> uppers;
    for (int c = 0; c < cols_; ++c) {
      if (!is_basic_[c] && at_upper_[c] && upper_[c] > 0.0) uppers.push_back(c);
    }
    for (int r = 0; r < rows_; ++r) {
      const double* tr = row(r);
      double v = 0.0;
      for (int i = 0; i < rows_; ++i) v += tr[start_col_[i]] * rhs_[i];
      for (int c : uppers) v -= tr[c] * upper_[c];
      beta_[r] = v;
    }
  }

  int choose_entering() const {
    int best = -1;
    double best_score = opt_.opt_tol;
    for (int c = 0; c < cols_; ++c) {
      if (is_basic_[c] || upper_[c] <= 0.0) continue;
      double score = at_upper_[c] ? red_[c] : -red_[c];
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    return best;
  }

  void count_iteration() {
    if (++iterations_ > budget_) {
      throw NumericalError("simplex iteration limit exceeded (" + std::to_string(budget_) +
                           " pivots)");
    }
  }

  // Moves basic values that sit on a bound into the interior by a small
  // row-dependent amount. Equivalent to perturbing the right-hand side.
  void perturb() {
    for (int r = 0; r < rows_; ++r) {
      double xi = 1e-7 * (1.0 + static_cast<double>((r * 7919) % 997) / 997.0);
      double ub = upper_[basis_[r]];
      if (beta_[r] < xi) {
        beta_[r] = std::isfinite(ub) ? std::min(xi, 0.5 * ub) : xi;
      } else if (std::isfinite(ub) && beta_[r] > ub - xi) {
        beta_[r] = std::max(ub - xi, 0.5 * ub);
      }
    }
    perturbed_ = true;
  }

  PhaseResult run_phase(bool phase_two) {
    int degenerate = 0;
    for (;;) {
      int c = choose_entering();
      if (c < 0) {
        if (!perturbed_) return PhaseResult::kOptimal;
        perturbed_ = false;
        degenerate = 0;
        recompute_beta();
        if (!dual_cleanup()) return PhaseResult::kInfeasible;
        continue;
      }
      count_iteration();
      double dir = at_upper_[c] ? -1.0 : 1.0;

      // Pass one: largest step keeping every basic within its bounds
      // relaxed by the feasibility tolerance.
      const double delta = opt_.feas_tol;
      double theta_max = upper_[c];
      for (int r = 0; r < rows_; ++r) {
        double a = row(r)[c];
        if (std::abs(a) <= kPivotTol) continue;
        double rate = -dir * a;
        double ub = upper_[basis_[r]];
        if (rate < 0.0) {
          theta_max = std::min(theta_max, (beta_[r] + delta) / -rate);
        } else if (std::isfinite(ub)) {
          theta_max = std::min(theta_max, (ub - beta_[r] + delta) / rate);
        }
      }
      if (!std::isfinite(theta_max)) {
        if (phase_two) return PhaseResult::kUnbounded;
        throw NumericalError("unbounded ray in phase one");
      }
      // Pass two: among rows blocking within theta_max, take the largest pivot.
      int leave = -1;
      double best_pivot = 0.0, theta = 0.0;
      for (int r = 0; r < rows_; ++r) {
        double a = row(r)[c];
        if (std::abs(a) <= kPivotTol) continue;
        double rate = -dir * a;
        double ub = upper_[basis_[r]];
        double lim;
        if (rate < 0.0) {
          lim = std::max(0.0, beta_[r]) / -rate;
        } else if (std::isfinite(ub)) {
          lim = std::max(0.0, ub - beta_[r]) / rate;
        } else {
          continue;
        }
        if (lim > theta_max) continue;
        bool better = std::abs(a) > best_pivot ||
                      (std::abs(a) == best_pivot && basis_[r] < basis_[leave]);
        if (better) {
          best_pivot = std::abs(a);
          leave = r;
          theta = lim;
        }
      }
      bool flip = leave < 0 || upper_[c] <= theta;
      if (flip) theta = upper_[c];

      for (int r = 0; r < rows_; ++r) {
        double a = row(r)[c];
        if (a != 0.0) beta_[r] -= dir * a * theta;
      }
      if (theta <= 1e-12) {
        if (++degenerate >= opt_.stall_limit && !perturbed_) {
          perturb();
          degenerate = 0;
        }
      } else {
        degenerate = 0;
      }
      if (flip) {
        at_upper_[c] = !at_upper_[c];
        continue;
      }
      double entering_value = (at_upper_[c] ? upper_[c] : 0.0) + dir * theta;
      double leave_rate = -dir * row(leave)[c];
      exchange(leave, c, entering_value, leave_rate > 0.0);
      if (iterations_ % 256 == 0 && !perturbed_) recompute_beta();
    }
  }

  // Dual simplex pivots until every basic is within its bounds. The current
  // reduced costs are optimal, so each pivot keeps them so. Returns false if
  // some row admits no entering column (primal infeasible).
  bool dual_cleanup() {
    const double tol = opt_.feas_tol;
    for (;;) {
      int r_out = -1;
      double worst = tol;
      for (int r = 0; r < rows_; ++r) {
        double ub = upper_[basis_[r]];
        double viol = std::max(-beta_[r], std::isfinite(ub) ? beta_[r] - ub : 0.0);
        if (viol > worst) {
          worst = viol;
          r_out = r;
        }
      }
      if (r_out < 0) return true;
      count_iteration();
      const double* tr = row(r_out);
      bool to_lower = beta_[r_out] < 0.0;
      int enter = -1;
      double best_ratio = kInfinity, best_pivot = 0.0;
      for (int c = 0; c < cols_; ++c) {
        if (is_basic_[c] || upper_[c] <= 0.0) continue;
        double a = tr[c];
        if (std::abs(a) <= kPivotTol) continue;
        double dir = at_upper_[c] ? -1.0 : 1.0;
        // beta_r moves by -dir * a per unit step of the entering column
        bool helps = to_lower ? (-dir * a > 0.0) : (-dir * a < 0.0);
        if (!helps) continue;
        double ratio = std::abs(red_[c]) / std::abs(a);
        if (ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && std::abs(a) > best_pivot)) {
          best_ratio = std::min(best_ratio, ratio);
          best_pivot = std::abs(a);
          enter = c;
        }
      }
      if (enter < 0) {
        // No usable pivot: a clear violation proves infeasibility, a marginal
        // one is left to the caller.
        if (worst > 1e-7 * rhs_scale_) return false;
        throw NumericalError("dual simplex stalled on a nearly feasible row");
      }
      double dir = at_upper_[enter] ? -1.0 : 1.0;
      double a = tr[enter];
      double target = to_lower ? 0.0 : upper_[basis_[r_out]];
      double theta = (beta_[r_out] - target) / (dir * a);
      for (int r = 0; r < rows_; ++r) {
        double ar = row(r)[enter];
        if (ar != 0.0) beta_[r] -= dir * ar * theta;
      }
      double entering_value = (at_upper_[enter] ? upper_[enter] : 0.0) + dir * theta;
      exchange(r_out, enter, entering_value, !to_lower);
    }
  }

  void exchange(int r, int c, double entering_value, bool leaving_to_upper) {
    int b = basis_[r];
    is_basic_[b] = 0;
    at_upper_[b] = leaving_to_upper ? 1 : 0;
    pivot(r, c);
    beta_[r] = entering_value;
    basis_[r] = c;
    is_basic_[c] = 1;
    at_upper_[c] = 0;
  }

  void pivot(int r, int c) {
    double* pr = row(r);
    double inv = 1.0 / pr[c];
    nz_.clear();
    for (int k = 0; k < cols_; ++k) {
      if (pr[k] != 0.0) {
        pr[k] *= inv;
        nz_.push_back(k);
      }
    }
    pr[c] = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* pi = row(i);
      double f = pi[c];
      if (f == 0.0) continue;
      for (int k : nz_) pi[k] -= f * pr[k];
      pi[c] = 0.0;
    }
    double f = red_[c];
    if (f != 0.0) {
      for (int k : nz_) red_[k] -= f * pr[k];
      red_[c] = 0.0;
    }
  }

  // Pivots zero-valued artificials out of the basis where a structural or
  // slack column can replace them; the rest sit on redundant rows at 0.
  void drive_out_artificials() {
    for (int r = 0; r < rows_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      const double* tr = row(r);
      int enter = -1;
      double best = 1e-7;
      for (int c = 0; c < first_artificial_; ++c) {
        if (!is_basic_[c] && std::abs(tr[c]) > best) {
          best = std::abs(tr[c]);
          enter = c;
        }
      }
      if (enter < 0) continue;
      double value = at_upper_[enter] ? upper_[enter] : 0.0;
      exchange(r, enter, value, false);
    }
    recompute_beta();
  }

  std::vector<double> primal() const {
    std::vector<double> y(cols_, 0.0);
    for (int c = 0; c < cols_; ++c) {
      if (!is_basic_[c] && at_upper_[c]) y[c] = upper_[c];
    }
    for (int r = 0; r < rows_; ++r) {
      y[basis_[r]] = std::clamp(beta_[r], 0.0, upper_[basis_[r]]);
    }
    std::vector<double> x(map_.size());
    for (std::size_t j = 0; j < map_.size(); ++j) {
      const Mapping& mp = map_[j];
      x[j] = mp.shift + mp.sign * y[mp.col];
      if (mp.neg_col >= 0) x[j] -= y[mp.neg_col];
    }
    return x;
  }

  const MilpModel* model_;
  LpOptions opt_;
  std::vector<std::vector<std::pair<int, double>>> orig_col_;  // signed start columns
  std::vector<Mapping> map_;
  std::vector<double> cost_, upper_, red_;
  std::vector<double> tab_, beta_, rhs_;
  std::vector<int> basis_, start_col_, nz_;
  std::vector<char> at_upper_, is_basic_;
  int rows_ = 0, cols_ = 0, first_artificial_ = 0, num_artificial_ = 0;
  double rhs_scale_ = 1.0;
  bool trivially_infeasible_ = false;
  bool perturbed_ = false;
  long iterations_ = 0, budget_ = 0;
};

}  // namespace detail

// LP relaxation of m with per-variable bounds overriding the model's.
inline LpSolution solve_lp(const MilpModel& m, const std::vector<double>& lower,
                           const std::vector<double>& upper, const LpOptions& opt = {}) {
  detail::DenseSimplex simplex(m, lower, upper, opt);
  return simplex.solve();
}

// LP relaxation of m (integrality dropped).
inline LpSolution solve_lp(const MilpModel& m, const LpOptions& opt = {}) {
  std::vector<double> lo, hi;
  lo.reserve(m.variables.size());
  hi.reserve(m.variables.size());
  for (const auto& v : m.variables) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  return solve_lp(m, lo, hi, opt);
}

}  // namespace vtol

#endif  // VTOL_LP_SOLVER_HPP_
