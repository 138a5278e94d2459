#ifndef VTOL_PWL_MILP_HPP_
#define VTOL_PWL_MILP_HPP_

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtol/duration.hpp"
#include "vtol/model.hpp"

namespace vtol {

// Coarse time grid of one vehicle, stored as indices into its fine samples.
struct CoarseGrid {
  int vtol_id = 0;
  std::vector<std::size_t> nodes;  // strictly increasing, first = 0, last = fine size - 1

  std::size_t size() const { return nodes.size(); }
};

inline std::vector<double> grid_times(const DurationFunction& d, const CoarseGrid& g) {
  std::vector<double> out;
  out.reserve(g.size());
  for (std::size_t k : g.nodes) out.push_back(d.times[k]);
  return out;
}

inline std::vector<EnvelopeBounds> grid_envelopes(const DurationFunction& d,
                                                  const CoarseGrid& g) {
  std::vector<EnvelopeBounds> out;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    out.push_back(envelope_errors(d, g.nodes[k], g.nodes[k + 1]));
  }
  return out;
}

// Variable indices of the scheduling model, per vehicle position i.
struct ScheduleVars {
  std::vector<int> t;
  std::vector<std::vector<int>> lam;
  std::vector<std::vector<int>> z;
  std::vector<int> e;
  std::vector<std::vector<int>> w;  // w[i][j] for i < j, -1 otherwise

  int n() const { return static_cast<int>(t.size()); }
};

struct ScheduleMilp {
  MilpModel model;
  ScheduleVars vars;
  double big_m = 0.0;
  std::vector<std::vector<EnvelopeBounds>> envelopes;
};

// Large enough that a deactivated sequencing row can never bind.
inline double choose_big_M(const std::vector<DurationFunction>& durations,
                           const std::vector<CoarseGrid>& grids) {
  double t_hi = -kInfinity, t_lo = kInfinity, d_hi = 0.0, e_hi = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    const DurationFunction& d = durations[i];
    t_hi = std::max(t_hi, d.t_max());
    t_lo = std::min(t_lo, d.t_min());
    d_hi = std::max(d_hi, d.max_value());
    for (const auto& env : grid_envelopes(d, grids[i])) e_hi = std::max(e_hi, env.e_u);
  }
  return (t_hi - t_lo) + d_hi + e_hi + 1.0;
}

namespace detail {

inline std::string vname(const char* stem, int a) { return std::string(stem) + "_" + std::to_string(a); }
inline std::string vname(const char* stem, int a, int b) {
  return vname(stem, a) + "_" + std::to_string(b);
}

}  // namespace detail

// Piecewise-linear relaxation of the one-at-a-time scheduling problem.
// Variables per vehicle: start t, convex weights lam over the coarse nodes,
// pointer binaries z over the coarse intervals and the free envelope error e.
// One order binary w per pair.
inline ScheduleMilp build_model(const std::vector<DurationFunction>& durations,
                                const std::vector<CoarseGrid>& grids, double alpha,
                                double big_m) {
  if (durations.size() != grids.size()) {
    throw std::invalid_argument("one coarse grid per duration function required");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  const int n = static_cast<int>(durations.size());
  ScheduleMilp out;
  out.big_m = big_m;
  MilpModel& m = out.model;
  ScheduleVars& v = out.vars;
  v.lam.resize(n);
  v.z.resize(n);
  v.w.assign(n, std::vector<int>(n, -1));

  std::vector<std::vector<double>> node_t(n), node_d(n);
  for (int i = 0; i < n; ++i) {
    const DurationFunction& d = durations[i];
    const CoarseGrid& g = grids[i];
    if (g.size() < 2) {
      throw std::invalid_argument("coarse grid of vehicle " + std::to_string(d.vtol_id) +
                                  " needs at least two nodes");
    }
    if (g.nodes.front() != 0 || g.nodes.back() != d.size() - 1 ||
        !std::is_sorted(g.nodes.begin(), g.nodes.end()) ||
        std::adjacent_find(g.nodes.begin(), g.nodes.end()) != g.nodes.end()) {
      throw std::invalid_argument("coarse grid of vehicle " + std::to_string(d.vtol_id) +
                                  " must span the window with increasing fine nodes");
    }
    for (std::size_t k : g.nodes) {
      node_t[i].push_back(d.times[k]);
      node_d[i].push_back(d.values[k]);
    }
    out.envelopes.push_back(grid_envelopes(d, g));

    const int id = d.vtol_id;
    const int K = static_cast<int>(g.size());
    v.t.push_back(m.add_variable(detail::vname("t", id), VarKind::kContinuous, d.t_min(),
                                 d.t_max()));
    for (int k = 1; k <= K; ++k) {
      v.lam[i].push_back(m.add_variable(detail::vname("lam", id, k), VarKind::kContinuous, 0.0, 1.0));
    }
    for (int k = 1; k < K; ++k) {
      v.z[i].push_back(m.add_variable(detail::vname("z", id, k), VarKind::kBinary, 0.0, 1.0));
    }
    v.e.push_back(m.add_variable(detail::vname("e", id), VarKind::kContinuous, -kInfinity,
                                 kInfinity));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      v.w[i][j] = m.add_variable(
          detail::vname("w", durations[i].vtol_id, durations[j].vtol_id), VarKind::kBinary,
          0.0, 1.0);
    }
  }

  // Terms of D_pw,i = sum_k lam_ik D_i(t_ik) + e_i, scaled by s.
  auto dpw_terms = [&](int i, double s, std::vector<Term>& terms) {
    for (std::size_t k = 0; k < v.lam[i].size(); ++k) {
      terms.push_back({v.lam[i][k], s * node_d[i][k]});
    }
    terms.push_back({v.e[i], s});
  };

  for (int i = 0; i < n; ++i) {
    const int id = durations[i].vtol_id;
    const int K = static_cast<int>(v.lam[i].size());

    std::vector<Term> row{{v.t[i], 1.0}};
    for (int k = 0; k < K; ++k) row.push_back({v.lam[i][k], -node_t[i][k]});
    m.add_constraint(detail::vname("time", id), row, Relation::kEqual, 0.0);

    row.clear();
    for (int z : v.z[i]) row.push_back({z, 1.0});
    m.add_constraint(detail::vname("pointer", id), row, Relation::kEqual, 1.0);

    row.clear();
    for (int l : v.lam[i]) row.push_back({l, 1.0});
    m.add_constraint(detail::vname("convex", id), row, Relation::kEqual, 1.0);

    // lam_k may be nonzero only next to the active interval
    for (int k = 0; k < K; ++k) {
      row = {{v.lam[i][k], 1.0}};
      if (k > 0) row.push_back({v.z[i][k - 1], -1.0});
      if (k < K - 1) row.push_back({v.z[i][k], -1.0});
      m.add_constraint(detail::vname("adjacent", id, k + 1), row, Relation::kLessEqual, 0.0);
    }

    row = {{v.e[i], 1.0}};
    for (int k = 0; k + 1 < K; ++k) row.push_back({v.z[i][k], -out.envelopes[i][k].e_u});
    m.add_constraint(detail::vname("under", id), row, Relation::kLessEqual, 0.0);

    row = {{v.e[i], 1.0}};
    for (int k = 0; k + 1 < K; ++k) row.push_back({v.z[i][k], out.envelopes[i][k].e_o});
    m.add_constraint(detail::vname("over", id), row, Relation::kGreaterEqual, 0.0);
  }

  // w_ij = 1: i lands before j starts. w_ij = 0: the reverse.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int a = durations[i].vtol_id, b = durations[j].vtol_id;
      std::vector<Term> row{{v.t[i], 1.0}, {v.t[j], -1.0}, {v.w[i][j], big_m}};
      dpw_terms(i, 1.0, row);
      m.add_constraint(detail::vname("before", a, b), row, Relation::kLessEqual, big_m);

      row = {{v.t[j], 1.0}, {v.t[i], -1.0}, {v.w[i][j], -big_m}};
      dpw_terms(j, 1.0, row);
      m.add_constraint(detail::vname("after", a, b), row, Relation::kLessEqual, 0.0);
    }
  }

  for (int i = 0; i < n; ++i) {
    m.objective[v.t[i]] += 1.0;
    for (std::size_t k = 0; k < v.lam[i].size(); ++k) {
      m.objective[v.lam[i][k]] += alpha * node_d[i][k];
    }
    m.objective[v.e[i]] += alpha;
  }
  return out;
}

// D_pw of vehicle i at solution x.
inline double piecewise_duration(const ScheduleMilp& s, const std::vector<DurationFunction>& d,
                                 const CoarseGrid& g, int i, const std::vector<double>& x) {
  double sum = x[s.vars.e[i]];
  for (std::size_t k = 0; k < g.size(); ++k) sum += x[s.vars.lam[i][k]] * d[i].values[g.nodes[k]];
  return sum;
}

// Index of the active coarse interval of vehicle i at solution x.
inline std::size_t active_interval(const ScheduleMilp& s, int i, const std::vector<double>& x) {
  const auto& z = s.vars.z[i];
  std::size_t best = 0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (x[z[k]] > x[z[best]]) best = k;
  }
  return best;
}

}  // namespace vtol

#endif  // VTOL_PWL_MILP_HPP_
