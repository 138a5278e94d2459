#ifndef VTOL_BNB_HPP_
#define VTOL_BNB_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <limits>
#include <memory>
#include <ostream>
#include <vector>

#include "vtol/lp_solver.hpp"
#include "vtol/model.hpp"

namespace vtol {

struct BnbConfig {
  double int_tol = 1e-6;
  double feas_tol = 1e-8;
  double gap_tol = 0.0;
  long node_limit = 2'000'000;
  // Memory for parent tableaus kept to warm-start child LPs; 0 disables.
  std::size_t warm_start_bytes = std::size_t{256} << 20;
};

enum class MilpStatus { kOptimal, kInfeasible, kNodeLimit };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kNodeLimit: return "node_limit";
  }
  return "?";
}

struct NodeRecord {
  long id = 0;
  long parent = -1;  // -1 for the root
  int depth = 0;
  double bound = 0.0;      // LP bound, +inf if the node LP was infeasible
  double incumbent = 0.0;  // incumbent after processing, +inf if none
};

struct MilpSolution {
  MilpStatus status = MilpStatus::kInfeasible;
  std::vector<double> x;
  double objective = kInfinity;
  long nodes_explored = 0;
  double proof_gap = kInfinity;  // incumbent minus best open bound
  std::vector<NodeRecord> node_log;
};

namespace detail {

struct BnbNode {
  long id;
  long parent;
  int depth;
  double bound;
  int branch_var;
  std::vector<double> lower, upper;
};

// Best bound first; deeper nodes first on equal bounds, then creation order.
struct BnbOrder {
  bool operator()(const std::unique_ptr<BnbNode>& a, const std::unique_ptr<BnbNode>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    if (a->depth != b->depth) return a->depth < b->depth;
    return a->id > b->id;
  }
};

inline bool prunable(double bound, double incumbent, double gap_tol) {
  if (!std::isfinite(incumbent)) return false;
  double slack = std::max(gap_tol, 1e-9 * std::max(1.0, std::abs(incumbent)));
  return bound >= incumbent - slack;
}

}  // namespace detail

// Exact LP-based branch and bound. Children of a node fix the most fractional
// binary to 0 and then to 1; each child LP is solved when the child is created
// so the queue is keyed on the child's own bound.
inline MilpSolution solve_milp(const MilpModel& m, const BnbConfig& cfg = {}) {
  m.check();
  MilpSolution out;
  LpOptions lp_opt;
  lp_opt.feas_tol = cfg.feas_tol;

  std::vector<int> binaries;
  for (int j = 0; j < m.num_variables(); ++j) {
    if (m.variables[j].kind == VarKind::kBinary) binaries.push_back(j);
  }

  double incumbent = kInfinity;
  std::vector<double> best_x;
  long next_id = 0;
  // Max-heap under BnbOrder, i.e. the best node sits at the front.
  std::vector<std::unique_ptr<detail::BnbNode>> open;
  auto push = [&](std::unique_ptr<detail::BnbNode> n) {
    open.push_back(std::move(n));
    std::push_heap(open.begin(), open.end(), detail::BnbOrder{});
  };
  auto pop = [&] {
    std::pop_heap(open.begin(), open.end(), detail::BnbOrder{});
    auto n = std::move(open.back());
    open.pop_back();
    return n;
  };

  auto record = [&](const detail::BnbNode& n) {
    out.node_log.push_back({n.id, n.parent, n.depth, n.bound, incumbent});
  };

  // Optimal tableaus of open nodes, oldest first out when over budget.
  using Tableau = detail::DenseSimplex;
  std::map<long, std::unique_ptr<Tableau>> cache;
  std::deque<long> cache_order;
  std::size_t cache_capacity = 0;
  auto remember = [&](long id, std::unique_ptr<Tableau> t) {
    if (cfg.warm_start_bytes == 0) return;
    if (cache_capacity == 0) {
      cache_capacity = std::max<std::size_t>(1, cfg.warm_start_bytes / std::max<std::size_t>(1, t->bytes()));
    }
    while (cache.size() >= cache_capacity && !cache_order.empty()) {
      cache.erase(cache_order.front());
      cache_order.pop_front();
    }
    cache.emplace(id, std::move(t));
    cache_order.push_back(id);
  };
  auto recall = [&](long id) -> std::unique_ptr<Tableau> {
    auto it = cache.find(id);
    if (it == cache.end()) return nullptr;
    auto t = std::move(it->second);
    cache.erase(it);
    cache_order.erase(std::find(cache_order.begin(), cache_order.end(), id));
    return t;
  };

  // Node LP, warm-started from the parent tableau when one is given. Falls
  // back to a cold solve if the warm start runs into numerical trouble.
  // The last child takes the parent tableau over instead of copying it.
  auto node_lp = [&](const detail::BnbNode& node, std::unique_ptr<Tableau>* parent, bool last,
                     int var, std::unique_ptr<Tableau>& state) {
    if (parent && *parent) {
      state = last ? std::move(*parent) : std::make_unique<Tableau>(**parent);
      try {
        LpSolution lp = state->resolve_with_bounds(var, node.lower[var], node.upper[var]);
        if (lp.status != LpStatus::kUnbounded) return lp;
      } catch (const NumericalError&) {
      }
    }
    state = std::make_unique<Tableau>(m, node.lower, node.upper, lp_opt);
    return state->solve();
  };

  // Solves a node LP; returns the most fractional binary or -1 if integral.
  // Integral solutions update the incumbent.
  auto evaluate = [&](detail::BnbNode& node, std::unique_ptr<Tableau>* parent, bool last,
                      int var, std::unique_ptr<Tableau>& state, bool& feasible) -> int {
    ++out.nodes_explored;
    LpSolution lp = node_lp(node, parent, last, var, state);
    if (lp.status == LpStatus::kUnbounded) {
      throw NumericalError("LP relaxation is unbounded");
    }
    feasible = lp.status == LpStatus::kOptimal;
    if (!feasible) {
      node.bound = kInfinity;
      record(node);
      return -1;
    }
    node.bound = lp.objective;
    int branch = -1;
    double best_frac = cfg.int_tol;
    for (int j : binaries) {
      double v = lp.x[j];
      double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac) {
        best_frac = frac;
        branch = j;
      }
    }
    if (branch < 0 && lp.objective < incumbent) {
      // Re-solve with the binaries pinned to their rounded values so the
      // stored solution is exactly integral.
      std::vector<double> lo = node.lower, hi = node.upper;
      for (int j : binaries) lo[j] = hi[j] = std::round(lp.x[j]);
      LpSolution fixed = solve_lp(m, lo, hi, lp_opt);
      if (fixed.status == LpStatus::kOptimal && fixed.objective < incumbent) {
        incumbent = fixed.objective;
        best_x = fixed.x;
      }
    }
    record(node);
    return branch;
  };

  auto make_node = [&](long parent, int depth, std::vector<double> lo, std::vector<double> hi) {
    return std::make_unique<detail::BnbNode>(detail::BnbNode{
        next_id++, parent, depth, -kInfinity, -1, std::move(lo), std::move(hi)});
  };

  std::vector<double> lo0, hi0;
  for (const auto& v : m.variables) {
    lo0.push_back(v.lower);
    hi0.push_back(v.upper);
  }
  auto root = make_node(-1, 0, lo0, hi0);
  bool feasible = false;
  std::unique_ptr<Tableau> state;
  root->branch_var = evaluate(*root, nullptr, false, -1, state, feasible);
  if (feasible && root->branch_var >= 0) {
    remember(root->id, std::move(state));
    push(std::move(root));
  }

  bool hit_limit = false;
  while (!open.empty()) {
    if (out.nodes_explored >= cfg.node_limit) {
      hit_limit = true;
      break;
    }
    auto node = pop();
    std::unique_ptr<Tableau> parent = recall(node->id);
    if (detail::prunable(node->bound, incumbent, cfg.gap_tol)) continue;
    if (!parent && cfg.warm_start_bytes > 0) {
      parent = std::make_unique<Tableau>(m, node->lower, node->upper, lp_opt);
      if (parent->solve().status != LpStatus::kOptimal) parent.reset();
    }
    const int var = node->branch_var;
    for (double fix : {0.0, 1.0}) {
      std::vector<double> lo = node->lower, hi = node->upper;
      lo[var] = hi[var] = fix;
      auto child = make_node(node->id, node->depth + 1, std::move(lo), std::move(hi));
      child->branch_var = evaluate(*child, &parent, fix == 1.0, var, state, feasible);
      if (!feasible || child->branch_var < 0) continue;
      if (detail::prunable(child->bound, incumbent, cfg.gap_tol)) continue;
      remember(child->id, std::move(state));
      push(std::move(child));
    }
  }

  if (best_x.empty()) {
    out.status = hit_limit ? MilpStatus::kNodeLimit : MilpStatus::kInfeasible;
    return out;
  }
  out.x = best_x;
  out.objective = incumbent;
  if (hit_limit) {
    double best_open = incumbent;
    for (const auto& n : open) best_open = std::min(best_open, n->bound);
    out.status = MilpStatus::kNodeLimit;
    out.proof_gap = std::max(0.0, incumbent - best_open);
  } else {
    out.status = MilpStatus::kOptimal;
    out.proof_gap = 0.0;
  }
  return out;
}

inline void write_node_log(std::ostream& os, const std::vector<NodeRecord>& log) {
  os << "node,parent,depth,bound,incumbent\n";
  char buf[128];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%ld,%ld,%d,%.10g,%.10g\n", r.id, r.parent, r.depth, r.bound,
                  r.incumbent);
    os << buf;
  }
}

}  // namespace vtol

#endif  // VTOL_BNB_HPP_
