#ifndef VTOL_TRAJECTORY_HPP_
#define VTOL_TRAJECTORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "vtol/error.hpp"
#include "vtol/hjb.hpp"
#include "vtol/scenario.hpp"

namespace vtol {

struct TrajectoryPoint {
  double t = 0.0;
  Vec2 x;
};

struct Trajectory {
  int vtol_id = 0;
  std::vector<TrajectoryPoint> points;
  double path_length = 0.0;  // meters
  double duration = 0.0;     // seconds

  double start() const { return points.front().t; }
  double end() const { return points.back().t; }
};

// Smallest slice time not earlier than t_star.
inline double round_up_start(double t_star, const GridSpec& grid) {
  if (!(t_star >= -1e-9)) throw std::invalid_argument("start time must be non-negative");
  double k = std::ceil((t_star - 1e-9) / grid.dt);
  return std::max(0.0, k) * grid.dt;
}

namespace detail {

inline bool passable(const Scenario& s, Vec2 x, double t) {
  Region r = classify_point(s, x, t);
  return r == Region::kFree || r == Region::kTarget;
}

// Closest point of the target disk boundary as seen from x.
inline Vec2 target_projection(const Scenario& s, Vec2 x) {
  Vec2 rel = x - s.target.center;
  double d = norm(rel);
  if (d == 0.0) return x;
  return s.target.center + (s.target.radius / d) * rel;
}

}  // namespace detail

// Greedy forward recursion over the value field: each step takes the heading
// minimizing dx + V(t + dt, landing point) among headings whose landing point
// and midpoint are collision-free. Once the target is within reach (straight
// distance or V at most one step), the path closes with a straight segment to
// the nearest point of the target boundary.
inline Trajectory extract_trajectory(const ValueField& f, const Scenario& s, Vec2 x0,
                                     double t_start, int vtol_id = 0) {
  const GridSpec& g = f.grid();
  const double speed = g.dx / g.dt;
  Trajectory tr;
  tr.vtol_id = vtol_id;
  tr.points.push_back({t_start, x0});

  auto fail = [&](const std::string& why) {
    std::ostringstream ss;
    ss << "vehicle " << vtol_id << ": " << why << " (after " << tr.points.size() - 1
       << " steps from t = " << t_start << " s)";
    throw TrajectoryError(vtol_id, ss.str());
  };

  Region r0 = classify_point(s, x0, t_start);
  if (r0 == Region::kTarget) return tr;
  if (r0 != Region::kFree) fail("start point is not in free space");
  std::optional<double> v0 = value_at(f, t_start, x0);
  if (!v0) fail("start point cannot reach the target");
  const long budget = std::max(1L, static_cast<long>(std::ceil(4.0 * *v0 / g.dx)));

  for (long step = 0;; ++step) {
    const double t = t_start + static_cast<double>(step) * g.dt;
    const Vec2 x = tr.points.back().x;

    double to_disk = distance(x, s.target.center) - s.target.radius;
    std::optional<double> here = value_at(f, t, x);
    if (to_disk <= g.dx + 1e-9 || (here && *here <= g.dx)) {
      Vec2 end = detail::target_projection(s, x);
      double len = distance(x, end);
      double t_end = t + len / speed;
      if (detail::passable(s, 0.5 * (x + end), 0.5 * (t + t_end))) {
        tr.points.push_back({t_end, end});
        tr.path_length += len;
        break;
      }
    }
    if (step >= budget) fail("step budget exhausted before reaching the target");

    const double t_next = t + g.dt;
    int best = -1;
    double best_cost = 0.0;
    Vec2 best_x;
    for (int j = 0; j < g.n_controls; ++j) {
      Vec2 u = detail::heading(j, g.n_controls);
      Vec2 y = x + g.dx * u;
      if (!detail::passable(s, y, t_next)) continue;
      if (!detail::passable(s, x + 0.5 * g.dx * u, t + 0.5 * g.dt)) continue;
      std::optional<double> vy = value_at(f, t_next, y);
      if (!vy) continue;
      double cost = g.dx + *vy;
      if (best < 0 || cost < best_cost) {
        best = j;
        best_cost = cost;
        best_x = y;
      }
    }
    if (best < 0) fail("no admissible heading");
    tr.points.push_back({t_next, best_x});
    tr.path_length += g.dx;
  }
  tr.duration = tr.end() - tr.start();
  return tr;
}

struct CollisionViolation {
  std::size_t segment = 0;  // index of the point, or of the segment start
  bool midpoint = false;
  double t = 0.0;
  Vec2 x;
  Region region = Region::kObstacle;
};

// Checks every point and every segment midpoint against obstacles and bounds.
inline std::vector<CollisionViolation> verify_no_collision(const Trajectory& tr,
                                                           const Scenario& s) {
  std::vector<CollisionViolation> out;
  auto check = [&](std::size_t i, bool mid, double t, Vec2 x) {
    Region r = classify_point(s, x, t);
    if (r == Region::kObstacle || r == Region::kOutside) out.push_back({i, mid, t, x, r});
  };
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto& p = tr.points[i];
    check(i, false, p.t, p.x);
    if (i + 1 < tr.points.size()) {
      const auto& q = tr.points[i + 1];
      check(i, true, 0.5 * (p.t + q.t), 0.5 * (p.x + q.x));
    }
  }
  return out;
}

struct ScheduleRow {
  int starting_number = 0;
  int original_number = 0;
  double start = 0.0;
  double end = 0.0;
  double duration = 0.0;
};

using Schedule = std::vector<ScheduleRow>;

// Rows ordered by start time (ties by vehicle id). Throws if two flights
// overlap by more than 1e-9 s.
inline Schedule assemble_schedule(const std::vector<Trajectory>& trajectories) {
  Schedule rows;
  for (const Trajectory& tr : trajectories) {
    rows.push_back({0, tr.vtol_id, tr.start(), tr.end(), tr.duration});
  }
  std::sort(rows.begin(), rows.end(), [](const ScheduleRow& a, const ScheduleRow& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.original_number < b.original_number;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].starting_number = static_cast<int>(i) + 1;
    if (i > 0 && rows[i - 1].end > rows[i].start + 1e-9) {
      std::ostringstream ss;
      ss << "flight of vehicle " << rows[i - 1].original_number << " ends at "
         << rows[i - 1].end << " s after vehicle " << rows[i].original_number
         << " starts at " << rows[i].start << " s";
      throw ScheduleOverlapError(rows[i - 1].original_number, rows[i].original_number,
                                 ss.str());
    }
  }
  return rows;
}

inline void write_schedule_csv(std::ostream& os, const Schedule& rows) {
  os << "starting_number,original_number,start_s,end_s,duration_s\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.6f,%.6f\n", r.starting_number,
                  r.original_number, r.start, r.end, r.duration);
    os << buf;
  }
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t_s,x_m,y_m\n";
  char buf[128];
  for (const auto& p : tr.points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", p.t, p.x.x, p.x.y);
    os << buf;
  }
}

}  // namespace vtol

#endif  // VTOL_TRAJECTORY_HPP_
