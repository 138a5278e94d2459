#ifndef VTOL_PIPELINE_HPP_
#define VTOL_PIPELINE_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "vtol/bnb.hpp"
#include "vtol/duration.hpp"
#include "vtol/error.hpp"
#include "vtol/hjb.hpp"
#include "vtol/pwl_milp.hpp"
#include "vtol/refine.hpp"
#include "vtol/scenario.hpp"
#include "vtol/trajectory.hpp"

namespace vtol {

struct RunConfig {
  std::string scenario_path;
  double alpha = 1.0;
  double eps0 = 2.0;
  double eps = 0.5;
  int split_points = 1;
  double dx = 4.0;
  int n_controls = 64;
  double length_scale = kDefaultLengthScale;
  int threads = 0;
  long node_limit = 2'000'000;
  // Order interchangeable vehicles (identical duration tables) by id.
  bool break_symmetry = true;
  std::string out_dir;  // empty: write nothing
  bool export_field = false;
  bool export_durations = false;
  bool export_node_log = false;
  bool export_round_log = false;
  bool export_model = false;
  std::vector<int> plot_data;  // vehicle ids
};

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitUnreachable = 4,
  kExitNoConvergence = 5,
  kExitLimit = 6,
  kExitTrajectory = 7,
};

struct StageTimes {
  double field = 0.0;
  double milp = 0.0;
  double trajectories = 0.0;
  double total = 0.0;
};

struct RunOutcome {
  int exit_code = kExitOther;
  std::string stage;  // stage that failed, empty on success
  std::string message;
  std::optional<Scenario> scenario;
  GridSpec grid;
  long sweeps = 0;
  double field_delta = 0.0;
  std::vector<DurationFunction> durations;
  RefinementResult refinement;
  int symmetric_pairs = 0;
  std::vector<Trajectory> trajectories;  // in flight order
  Schedule schedule;
  int delayed_starts = 0;  // starts pushed past round_up(t*) by a late landing
  StageTimes times;
  std::vector<std::string> files;  // written, relative to out_dir
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline bool same_table(const DurationFunction& a, const DurationFunction& b) {
  if (a.times != b.times) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a.values[k] - b.values[k]) > 1e-9) return false;
  }
  return true;
}

}  // namespace detail

// Fixes w_ij = 1 for every pair i < j whose duration tables coincide. Any
// schedule maps to one with such twins in index order and the same objective,
// so the optimum is unchanged. Returns the number of fixed pairs.
inline int twin_order_pairs(const std::vector<DurationFunction>& ds,
                            std::vector<std::pair<int, int>>* pairs = nullptr) {
  int count = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.size(); ++j) {
      if (!detail::same_table(ds[i], ds[j])) continue;
      ++count;
      if (pairs) pairs->push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return count;
}

inline ModelHook twin_order_hook(const std::vector<DurationFunction>& ds) {
  std::vector<std::pair<int, int>> pairs;
  twin_order_pairs(ds, &pairs);
  return [pairs](ScheduleMilp& m) {
    for (auto [i, j] : pairs) m.model.variables[m.vars.w[i][j]].lower = 1.0;
  };
}

// Path length and duration of one vehicle over one period (periodic mode) or
// over its window (static mode), at every slice time.
inline void export_duration_plot_data(std::ostream& os, const ValueField& f, int vtol_id) {
  const Scenario& s = f.scenario();
  const VtolSpec* vt = s.find_vtol(vtol_id);
  if (!vt) throw std::invalid_argument("unknown vehicle id " + std::to_string(vtol_id));
  const GridSpec& g = f.grid();
  std::vector<double> ts;
  if (g.mode == ModeKind::kPeriodic) {
    for (int k = 0; k < g.n_slices; ++k) ts.push_back(g.slice_time(k));
  } else {
    long k0 = static_cast<long>(std::ceil(vt->t_min / g.dt - 1e-9));
    for (long k = k0; k * g.dt <= vt->t_max + 1e-9; ++k) ts.push_back(k * g.dt);
  }
  os << "t,d_meters,D_seconds\n";
  char buf[128];
  for (double t : ts) {
    std::optional<double> d = value_at(f, t, vt->start);
    if (d) {
      std::snprintf(buf, sizeof buf, "%.6f,%.10f,%.10f\n", t, *d, *d / vt->velocity);
    } else {
      std::snprintf(buf, sizeof buf, "%.6f,inf,inf\n", t);
    }
    os << buf;
  }
}

inline void write_run_summary(std::ostream& os, const RunConfig& cfg, const RunOutcome& r) {
  auto kv = [&](const std::string& k, const auto& v) { os << k << '=' << v << '\n'; };
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  kv("exit_code", r.exit_code);
  kv("status", r.exit_code == kExitOk ? std::string("ok") : "failed:" + r.stage);
  if (!r.message.empty()) kv("message", r.message);
  kv("scenario", cfg.scenario_path);
  kv("alpha", num(cfg.alpha));
  kv("eps0", num(cfg.eps0));
  kv("eps", num(cfg.eps));
  kv("split_points", cfg.split_points);
  kv("dx", num(cfg.dx));
  kv("controls", cfg.n_controls);
  kv("length_scale", num(cfg.length_scale));
  kv("dt", num(r.grid.dt));
  kv("sweeps", r.sweeps);
  kv("field_delta", num(r.field_delta));
  const RefinementResult& ref = r.refinement;
  if (ref.rounds > 0) {
    kv("refinement_status", to_string(ref.status));
    kv("objective", num(ref.objective));
    kv("rounds", ref.rounds);
    long nodes = 0;
    for (const auto& rec : ref.log) nodes += rec.nodes;
    kv("nodes", nodes);
    kv("bound_monotone", ref.bound_monotone ? "true" : "false");
    kv("symmetric_pairs", r.symmetric_pairs);
  }
  if (!r.schedule.empty()) {
    double sum = 0.0;
    for (const auto& row : r.schedule) sum += row.duration;
    kv("delayed_starts", r.delayed_starts);
    kv("mean_duration_s", num(sum / static_cast<double>(r.schedule.size())));
    kv("total_mission_s", num(r.schedule.back().end));
  }
  for (std::size_t i = 0; i < r.durations.size() && i < ref.t_star.size(); ++i) {
    std::string p = "vehicle_" + std::to_string(r.durations[i].vtol_id) + "_";
    kv(p + "t_star", num(ref.t_star[i]));
    kv(p + "d_pw", num(ref.d_pw[i]));
    kv(p + "error", num(ref.errors[i]));
  }
  kv("time_field_s", num(r.times.field));
  kv("time_milp_s", num(r.times.milp));
  kv("time_trajectories_s", num(r.times.trajectories));
  kv("time_total_s", num(r.times.total));
}

// Field, durations, refinement, trajectories, schedule. Never throws; the
// outcome carries the exit code, the failing stage and its message.
inline RunOutcome run_pipeline(const RunConfig& cfg) {
  RunOutcome r;
  const auto t_total = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;

  auto fail = [&](int code, const char* stage, const std::string& msg) {
    r.exit_code = code;
    r.stage = stage;
    r.message = msg;
  };
  auto open_out = [&](const std::string& name) {
    r.files.push_back(name);
    std::ofstream os(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + name + " in " + cfg.out_dir);
    return os;
  };
  auto finish = [&]() {
    r.times.total = detail::seconds_since(t_total);
    if (cfg.out_dir.empty()) return;
    try {
      fs::create_directories(cfg.out_dir);
      auto os = open_out("run_summary.txt");
      write_run_summary(os, cfg, r);
    } catch (const std::exception& e) {
      if (r.exit_code == kExitOk) fail(kExitOther, "output", e.what());
    }
  };

  const char* stage = "scenario";
  try {
    if (!(cfg.alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
    if (!(cfg.dx > 0.0)) throw std::invalid_argument("dx must be positive");
    r.scenario = load_scenario_file(cfg.scenario_path);
    const Scenario& s = *r.scenario;
    r.grid = make_grid(s, cfg.dx, cfg.n_controls);
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

    stage = "field";
    auto t0 = std::chrono::steady_clock::now();
    SolverConfig sc;
    sc.grid = r.grid;
    sc.length_scale = cfg.length_scale;
    sc.threads = cfg.threads;
    ValueField field = solve(s, sc, &r.sweeps, &r.field_delta);
    r.times.field = detail::seconds_since(t0);
    if (!cfg.out_dir.empty() && cfg.export_field) {
      auto os = open_out("field.csv");
      write_field_csv(os, field);
    }
    for (int id : cfg.plot_data) {
      if (cfg.out_dir.empty()) break;
      auto os = open_out("plot_" + std::to_string(id) + ".csv");
      export_duration_plot_data(os, field, id);
    }

    stage = "durations";
    for (const VtolSpec& vt : s.vtols) r.durations.push_back(build_duration(field, vt));
    if (!cfg.out_dir.empty() && cfg.export_durations) {
      for (const auto& d : r.durations) {
        auto os = open_out("durations_" + std::to_string(d.vtol_id) + ".csv");
        write_duration_csv(os, d);
      }
    }

    stage = "schedule";
    t0 = std::chrono::steady_clock::now();
    RefinementConfig rc;
    rc.eps0 = cfg.eps0;
    rc.eps = cfg.eps;
    rc.split_points = cfg.split_points;
    BnbConfig bc;
    bc.node_limit = cfg.node_limit;
    ModelHook hook;
    if (cfg.break_symmetry) {
      r.symmetric_pairs = twin_order_pairs(r.durations);
      if (r.symmetric_pairs > 0) hook = twin_order_hook(r.durations);
    }
    r.refinement = refine_loop(r.durations, cfg.alpha, rc, bc, hook);
    r.times.milp = detail::seconds_since(t0);
    const RefinementResult& ref = r.refinement;
    if (!cfg.out_dir.empty()) {
      if (cfg.export_round_log) {
        auto os = open_out("round_log.csv");
        write_round_log(os, ref.log);
      }
      if (cfg.export_node_log) {
        auto os = open_out("node_log.csv");
        write_node_log(os, ref.node_log);
      }
      if (cfg.export_model && !ref.grids.empty()) {
        ScheduleMilp last = build_model(r.durations, ref.grids, cfg.alpha, ref.big_m);
        if (hook) hook(last);
        auto os = open_out("model.lp");
        write_lp(os, last.model);
      }
    }
    switch (ref.status) {
      case RefinementStatus::kOptimal: break;
      case RefinementStatus::kInfeasible:
        fail(kExitInfeasible, stage, "scheduling problem is infeasible");
        finish();
        return r;
      case RefinementStatus::kMaxRounds:
        fail(kExitLimit, stage, "refinement stopped at the round limit");
        finish();
        return r;
      case RefinementStatus::kNodeLimit:
        fail(kExitLimit, stage, "branch and bound stopped at the node limit");
        finish();
        return r;
    }

    // Flights in MILP order; a start moves later if the previous flight,
    // re-extracted from its rounded start, lands after the rounded slot.
    stage = "trajectories";
    t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(s.vtols.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (ref.t_star[a] != ref.t_star[b]) return ref.t_star[a] < ref.t_star[b];
      return ref.w_star[std::min(a, b)][std::max(a, b)] == (a < b ? 1 : 0);
    });
    double prev_end = 0.0;
    for (std::size_t i : order) {
      const VtolSpec& vt = s.vtols[i];
      double start = round_up_start(ref.t_star[i], r.grid);
      if (start < prev_end - 1e-9) {
        start = round_up_start(prev_end, r.grid);
        ++r.delayed_starts;
      }
      Trajectory tr = extract_trajectory(field, s, vt.start, start, vt.id);
      auto bad = verify_no_collision(tr, s);
      if (!bad.empty()) {
        std::ostringstream ss;
        ss << "vehicle " << vt.id << " trajectory hits " << to_string(bad.front().region)
           << " at t = " << bad.front().t << " s (" << bad.size() << " violations)";
        throw TrajectoryError(vt.id, ss.str());
      }
      prev_end = tr.end();
      r.trajectories.push_back(std::move(tr));
    }
    r.schedule = assemble_schedule(r.trajectories);
    r.times.trajectories = detail::seconds_since(t0);

    if (!cfg.out_dir.empty()) {
      {
        auto os = open_out("schedule.csv");
        write_schedule_csv(os, r.schedule);
      }
      for (const auto& tr : r.trajectories) {
        auto os = open_out("trajectory_" + std::to_string(tr.vtol_id) + ".csv");
        write_trajectory_csv(os, tr);
      }
    }
    r.exit_code = kExitOk;
  } catch (const ScenarioError& e) {
    fail(kExitUsage, stage, e.what());
  } catch (const UnreachableError& e) {
    fail(kExitUnreachable, stage, e.what());
  } catch (const ConvergenceError& e) {
    fail(kExitNoConvergence, stage, e.what());
  } catch (const TrajectoryError& e) {
    fail(kExitTrajectory, stage, e.what());
  } catch (const ScheduleOverlapError& e) {
    fail(kExitTrajectory, stage, e.what());
  } catch (const std::invalid_argument& e) {
    fail(std::string(stage) == "scenario" ? kExitUsage : kExitOther, stage, e.what());
  } catch (const std::exception& e) {
    fail(kExitOther, stage, e.what());
  }
  finish();
  return r;
}

}  // namespace vtol

#endif  // VTOL_PIPELINE_HPP_
