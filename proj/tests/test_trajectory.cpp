#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "vtol/trajectory.hpp"

using namespace vtol;

namespace {

std::string scenario_path(const char* name) { return std::string(VTOL_SCENARIO_DIR) + "/" + name; }

struct FreeWorld {
  Scenario s;
  ValueField f;
};

const FreeWorld& free_world() {
  static const FreeWorld w = [] {
    FreeWorld out;
    out.s = load_scenario_file(scenario_path("free_space.json"));
    SolverConfig c;
    c.grid = make_grid(out.s, 4.0, 64);
    out.f = solve(out.s, c);
    return out;
  }();
  return w;
}

Trajectory hand_built(int id, std::vector<TrajectoryPoint> pts) {
  Trajectory tr;
  tr.vtol_id = id;
  tr.points = std::move(pts);
  tr.duration = tr.end() - tr.start();
  return tr;
}

}  // namespace

TEST(RoundUp, SliceCeiling) {
  GridSpec g;
  g.dt = 0.4;
  EXPECT_NEAR(round_up_start(2.63158, g), 2.8, 1e-12);
  EXPECT_DOUBLE_EQ(round_up_start(2.8, g), 7 * 0.4);
  EXPECT_DOUBLE_EQ(round_up_start(0.0, g), 0.0);
  EXPECT_DOUBLE_EQ(round_up_start(1.2 + 1e-10, g), 3 * 0.4);
  EXPECT_THROW(round_up_start(-1.0, g), std::invalid_argument);
}

TEST(Extract, StartInTargetIsSinglePoint) {
  const FreeWorld& w = free_world();
  Trajectory tr = extract_trajectory(w.f, w.s, {3, 4}, 0.0, 7);
  ASSERT_EQ(tr.points.size(), 1u);
  EXPECT_EQ(tr.duration, 0.0);
  EXPECT_EQ(tr.vtol_id, 7);
}

TEST(Extract, FreeSpaceFollowsTheDiagonal) {
  const FreeWorld& w = free_world();
  const Vec2 x0{192, 192};
  Trajectory tr = extract_trajectory(w.f, w.s, x0, 0.0, 1);
  double exact = norm(x0) - 10.0;
  EXPECT_NEAR(tr.path_length, exact, 0.05 * exact);
  EXPECT_LE(distance(tr.points.back().x, {0, 0}), 10.0 + 1e-9);
  // distance of every point from the line through x0 and the origin
  for (const auto& p : tr.points) {
    double off = std::abs(p.x.x * x0.y - p.x.y * x0.x) / norm(x0);
    EXPECT_LE(off, 4.0) << "at t = " << p.t;
  }
  EXPECT_NEAR(tr.duration * 10.0, tr.path_length, 4.0);
  EXPECT_TRUE(verify_no_collision(tr, w.s).empty());
}

TEST(Extract, StepsAreOneCellAndOneSliceApart) {
  const FreeWorld& w = free_world();
  Trajectory tr = extract_trajectory(w.f, w.s, {-160, 40}, 4.0, 2);
  const GridSpec& g = w.f.grid();
  ASSERT_GE(tr.points.size(), 3u);
  for (std::size_t k = 1; k + 1 < tr.points.size(); ++k) {
    EXPECT_NEAR(distance(tr.points[k].x, tr.points[k - 1].x), g.dx, 1e-9);
    EXPECT_NEAR(tr.points[k].t - tr.points[k - 1].t, g.dt, 1e-9);
  }
  // the closing segment is at most one cell long
  double last = distance(tr.points.back().x, tr.points[tr.points.size() - 2].x);
  EXPECT_LE(last, g.dx + 1e-9);
}

TEST(Extract, ValueDescendsEveryStep) {
  const FreeWorld& w = free_world();
  const GridSpec& g = w.f.grid();
  for (Vec2 x0 : {Vec2{192, 192}, Vec2{-160, 40}, Vec2{0, -190}, Vec2{37, 101}}) {
    Trajectory tr = extract_trajectory(w.f, w.s, x0, 0.0, 1);
    for (std::size_t k = 1; k < tr.points.size(); ++k) {
      double before = *value_at(w.f, tr.points[k - 1].t, tr.points[k - 1].x);
      double after = *value_at(w.f, tr.points[k].t, tr.points[k].x);
      EXPECT_LE(after, before - g.dx + 2.0 * g.dx + 1e-9);
    }
    EXPECT_LE(std::abs(tr.duration * 10.0 - tr.path_length), g.dx + 1e-9);
  }
}

TEST(Extract, UnreachableStartThrows) {
  Scenario s = load_scenario_file(scenario_path("walled.json"));
  SolverConfig c;
  c.grid = make_grid(s, 4.0, 64);
  ValueField f = solve(s, c);
  try {
    extract_trajectory(f, s, {120, 120}, 0.0, 2);
    FAIL() << "expected TrajectoryError";
  } catch (const TrajectoryError& e) {
    EXPECT_EQ(e.vtol_id(), 2);
  }
}

TEST(Collision, PointInsideFirstObstacleAtTimeZero) {
  Scenario s = load_scenario_file(scenario_path("orbiting.json"));
  Trajectory tr = hand_built(3, {{0.0, {100, 0}}, {0.4, {100, 190}}});
  auto v = verify_no_collision(tr, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].segment, 0u);
  EXPECT_FALSE(v[0].midpoint);
  EXPECT_EQ(v[0].t, 0.0);
  EXPECT_EQ(v[0].x, (Vec2{100, 0}));
  EXPECT_EQ(v[0].region, Region::kObstacle);
}

TEST(Collision, MidpointsAreChecked) {
  Scenario s = load_scenario_file(scenario_path("orbiting.json"));
  // both ends clear of obstacle 1 at t = 0, the midpoint (100, 0) is not
  Trajectory tr = hand_built(1, {{0.0, {100, -70}}, {0.0, {100, 70}}});
  auto v = verify_no_collision(tr, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_TRUE(v[0].midpoint);
}

TEST(Collision, LeavingTheDomainIsAViolation) {
  Scenario s = load_scenario_file(scenario_path("free_space.json"));
  Trajectory tr = hand_built(1, {{0.0, {196, 0}}, {0.4, {204, 0}}});
  auto v = verify_no_collision(tr, s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].region, Region::kOutside);
}

TEST(Schedule, SingleFlight) {
  Schedule rows = assemble_schedule({hand_built(4, {{2.0, {0, 50}}, {6.5, {0, 10}}})});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].starting_number, 1);
  EXPECT_EQ(rows[0].original_number, 4);
  EXPECT_DOUBLE_EQ(rows[0].duration, 4.5);
}

TEST(Schedule, SortedByStartAndNumbered) {
  Schedule rows = assemble_schedule({hand_built(1, {{30.0, {}}, {40.0, {}}}),
                                     hand_built(2, {{0.0, {}}, {10.0, {}}}),
                                     hand_built(3, {{10.0, {}}, {29.0, {}}})});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].original_number, 2);
  EXPECT_EQ(rows[1].original_number, 3);
  EXPECT_EQ(rows[2].original_number, 1);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(rows[k].starting_number, k + 1);
}

TEST(Schedule, OverlapNamesBothVehicles) {
  try {
    assemble_schedule({hand_built(1, {{0.0, {}}, {10.0, {}}}),
                       hand_built(2, {{9.0, {}}, {20.0, {}}})});
    FAIL() << "expected ScheduleOverlapError";
  } catch (const ScheduleOverlapError& e) {
    EXPECT_EQ(e.first_id(), 1);
    EXPECT_EQ(e.second_id(), 2);
  }
}

TEST(Schedule, CsvLayouts) {
  Trajectory tr = hand_built(5, {{1.2, {4, 8}}, {1.6, {4, 12}}});
  std::ostringstream sched, traj;
  write_schedule_csv(sched, assemble_schedule({tr}));
  write_trajectory_csv(traj, tr);
  EXPECT_EQ(sched.str(),
            "starting_number,original_number,start_s,end_s,duration_s\n"
            "1,5,1.200000,1.600000,0.400000\n");
  EXPECT_EQ(traj.str(), "t_s,x_m,y_m\n1.200000,4.000000,8.000000\n1.600000,4.000000,12.000000\n");
}
