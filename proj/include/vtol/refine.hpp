#ifndef VTOL_REFINE_HPP_
#define VTOL_REFINE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "vtol/bnb.hpp"
#include "vtol/duration.hpp"
#include "vtol/pwl_milp.hpp"

namespace vtol {

struct RefinementConfig {
  double eps0 = 2.0;  // initial linearization tolerance, seconds
  double eps = 0.5;   // final tolerance, seconds
  int split_points = 1;
  int max_rounds = 50;
};

enum class RefinementStatus { kOptimal, kInfeasible, kMaxRounds, kNodeLimit };

inline const char* to_string(RefinementStatus s) {
  switch (s) {
    case RefinementStatus::kOptimal: return "optimal";
    case RefinementStatus::kInfeasible: return "infeasible";
    case RefinementStatus::kMaxRounds: return "max_rounds";
    case RefinementStatus::kNodeLimit: return "node_limit";
  }
  return "?";
}

struct RoundRecord {
  int round = 0;
  double objective = 0.0;
  long nodes = 0;
  std::vector<double> errors;
  std::vector<std::size_t> grid_sizes;
};

struct RefinementResult {
  RefinementStatus status = RefinementStatus::kInfeasible;
  std::vector<double> t_star;
  std::vector<double> d_pw;
  std::vector<double> errors;
  std::vector<std::vector<int>> w_star;  // w_star[i][j], i < j
  double objective = kInfinity;
  int rounds = 0;
  std::vector<CoarseGrid> grids;  // grids of the last solved round
  double big_m = 0.0;
  std::vector<RoundRecord> log;
  // node log of every round, tagged with the round number
  std::vector<std::pair<int, NodeRecord>> node_log;
  bool bound_monotone = true;
};

// Bisects (at the fine node nearest each midpoint) every interval whose
// envelope error exceeds eps0.
inline CoarseGrid initial_grid(const DurationFunction& d, double eps0) {
  if (d.size() < 2) throw std::invalid_argument("duration function needs two samples");
  CoarseGrid g{d.vtol_id, {0, d.size() - 1}};
  for (std::size_t k = 0; k + 1 < g.nodes.size();) {
    std::size_t a = g.nodes[k], b = g.nodes[k + 1];
    if (envelope_errors(d, a, b).max_error() <= eps0) {
      ++k;
      continue;
    }
    if (b - a < 2) throw std::logic_error("single fine cell with nonzero envelope error");
    double mid = 0.5 * (d.times[a] + d.times[b]);
    auto it = std::lower_bound(d.times.begin() + a, d.times.begin() + b, mid);
    std::size_t c = static_cast<std::size_t>(it - d.times.begin());
    if (c > a + 1 && mid - d.times[c - 1] < d.times[c] - mid) --c;
    c = std::clamp(c, a + 1, b - 1);
    g.nodes.insert(g.nodes.begin() + static_cast<std::ptrdiff_t>(k) + 1, c);
  }
  return g;
}

inline std::vector<CoarseGrid> initial_grids(const std::vector<DurationFunction>& ds,
                                             double eps0) {
  std::vector<CoarseGrid> out;
  for (const auto& d : ds) out.push_back(initial_grid(d, eps0));
  return out;
}

// New fine nodes splitting coarse interval [a, b] into L + 1 equal parts.
// Falls back to a bisection when snapping leaves nothing new.
inline std::vector<std::size_t> split_nodes(const DurationFunction& d, std::size_t a,
                                            std::size_t b, int L) {
  std::vector<std::size_t> out;
  if (b - a < 2) return out;
  double ta = d.times[a], h = (d.times[b] - ta) / (L + 1);
  for (int l = 1; l <= L; ++l) {
    double t = ta + l * h;
    auto it = std::lower_bound(d.times.begin() + a, d.times.begin() + b, t);
    std::size_t c = static_cast<std::size_t>(it - d.times.begin());
    if (c > a && t - d.times[c - 1] <= d.times[c] - t) --c;
    if (c > a && c < b && (out.empty() || out.back() != c)) out.push_back(c);
  }
  if (out.empty()) out.push_back((a + b) / 2);
  return out;
}

using ModelHook = std::function<void(ScheduleMilp&)>;

// Adaptive refinement of the piecewise-linear relaxation until every
// vehicle's linearization error at its optimal start is at most eps.
inline RefinementResult refine_loop(const std::vector<DurationFunction>& ds, double alpha,
                                    const RefinementConfig& cfg, const BnbConfig& bnb = {},
                                    const ModelHook& customize = {}) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (cfg.split_points < 1) throw std::invalid_argument("split_points must be >= 1");
  RefinementResult res;
  std::vector<CoarseGrid> grids = initial_grids(ds, cfg.eps0);
  const double big_m = choose_big_M(ds, grids);
  res.big_m = big_m;
  const int n = static_cast<int>(ds.size());
  double prev_objective = -kInfinity;

  for (int round = 0; round < cfg.max_rounds; ++round) {
    ScheduleMilp milp = build_model(ds, grids, alpha, big_m);
    if (customize) customize(milp);
    MilpSolution sol = solve_milp(milp.model, bnb);
    for (const auto& r : sol.node_log) res.node_log.push_back({round, r});
    res.rounds = round + 1;
    if (sol.status == MilpStatus::kInfeasible) {
      res.status = RefinementStatus::kInfeasible;
      return res;
    }
    if (sol.status == MilpStatus::kNodeLimit) {
      res.status = RefinementStatus::kNodeLimit;
      return res;
    }

    const auto& x = sol.x;
    res.grids = grids;
    res.objective = sol.objective;
    res.t_star.assign(n, 0.0);
    res.d_pw.assign(n, 0.0);
    res.errors.assign(n, 0.0);
    res.w_star.assign(n, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) {
      res.t_star[i] = std::clamp(x[milp.vars.t[i]], ds[i].t_min(), ds[i].t_max());
      res.d_pw[i] = piecewise_duration(milp, ds, grids[i], i, x);
      res.errors[i] = std::abs(ds[i](res.t_star[i]) - res.d_pw[i]);
      for (int j = i + 1; j < n; ++j) {
        res.w_star[i][j] = static_cast<int>(std::lround(x[milp.vars.w[i][j]]));
      }
    }
    if (sol.objective < prev_objective - 1e-9 * std::max(1.0, std::abs(prev_objective))) {
      res.bound_monotone = false;
    }
    prev_objective = sol.objective;

    RoundRecord rec{round, sol.objective, sol.nodes_explored, res.errors, {}};
    for (const auto& g : grids) rec.grid_sizes.push_back(g.size());
    res.log.push_back(rec);

    bool done = true;
    for (int i = 0; i < n; ++i) {
      if (res.errors[i] <= cfg.eps) continue;
      std::size_t k = active_interval(milp, i, x);
      std::size_t a = grids[i].nodes[k], b = grids[i].nodes[k + 1];
      std::vector<std::size_t> fresh = split_nodes(ds[i], a, b, cfg.split_points);
      if (fresh.empty()) continue;  // single fine cell: exact, nothing to add
      auto& nodes = grids[i].nodes;
      nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(k) + 1, fresh.begin(), fresh.end());
      done = false;
    }
    if (done) {
      bool within = std::all_of(res.errors.begin(), res.errors.end(),
                                [&](double e) { return e <= cfg.eps; });
      res.status = within ? RefinementStatus::kOptimal : RefinementStatus::kMaxRounds;
      return res;
    }
  }
  res.status = RefinementStatus::kMaxRounds;
  return res;
}

inline void write_round_log(std::ostream& os, const std::vector<RoundRecord>& log) {
  os << "round,objective,nodes,max_error,errors,grid_sizes\n";
  char buf[64];
  for (const auto& r : log) {
    double worst = r.errors.empty() ? 0.0 : *std::max_element(r.errors.begin(), r.errors.end());
    std::snprintf(buf, sizeof buf, "%d,%.10g,%ld,%.10g,", r.round, r.objective, r.nodes, worst);
    os << buf;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.10g", i ? ";" : "", r.errors[i]);
      os << buf;
    }
    os << ',';
    for (std::size_t i = 0; i < r.grid_sizes.size(); ++i) {
      os << (i ? ";" : "") << r.grid_sizes[i];
    }
    os << '\n';
  }
}

inline void write_node_log(std::ostream& os,
                           const std::vector<std::pair<int, NodeRecord>>& log) {
  os << "round,node,parent,depth,bound,incumbent\n";
  char buf[160];
  for (const auto& [round, r] : log) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%ld,%d,%.10g,%.10g\n", round, r.id, r.parent, r.depth,
                  r.bound, r.incumbent);
    os << buf;
  }
}

}  // namespace vtol

#endif  // VTOL_REFINE_HPP_
