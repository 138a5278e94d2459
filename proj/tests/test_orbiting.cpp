// Properties of the four-obstacle scenario at the default grid.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "vtol/duration.hpp"
#include "vtol/pipeline.hpp"
#include "vtol/trajectory.hpp"

using namespace vtol;

namespace {

struct OrbitWorld {
  Scenario s;
  ValueField f;
};

const OrbitWorld& orbiting() {
  static const OrbitWorld w = [] {
    OrbitWorld out;
    out.s = load_scenario_file(std::string(VTOL_SCENARIO_DIR) + "/orbiting.json");
    SolverConfig c;
    c.grid = make_grid(out.s, 4.0, 64);
    out.f = solve(out.s, c);
    return out;
  }();
  return w;
}

// Path length from (192, 192) at every slice of one global period.
std::vector<double> corner_curve() {
  const OrbitWorld& w = orbiting();
  std::vector<double> d;
  for (int k = 0; k < w.f.grid().n_slices; ++k) {
    auto v = value_at(w.f, w.f.grid().slice_time(k), {192, 192});
    d.push_back(v ? *v : kInfinity);
  }
  return d;
}

}  // namespace

TEST(OrbitingScenario, CornerCurveRepeatsEvery20Seconds) {
  std::vector<double> d = corner_curve();
  ASSERT_EQ(d.size(), 200u);
  for (std::size_t k = 0; k + 50 < d.size(); ++k) {
    ASSERT_TRUE(std::isfinite(d[k]));
    EXPECT_NEAR(d[k], d[k + 50], 1e-9) << "slice " << k;
  }
}

TEST(OrbitingScenario, CornerCurveExtremaLocations) {
  std::vector<double> d = corner_curve();
  auto lo = std::min_element(d.begin(), d.begin() + 50);
  auto hi = std::max_element(d.begin(), d.begin() + 50);
  double t_lo = 0.4 * static_cast<double>(lo - d.begin());
  double t_hi = 0.4 * static_cast<double>(hi - d.begin());
  EXPECT_GE(t_lo, 0.0);
  EXPECT_LE(t_lo, 5.0);
  EXPECT_GE(*hi, 290.0);
  EXPECT_LE(*hi, 340.0);
  EXPECT_GE(t_hi, 8.0);
  EXPECT_LE(t_hi, 14.0);
  RecordProperty("min_length_m", std::to_string(*lo));
  RecordProperty("max_length_m", std::to_string(*hi));
}

TEST(OrbitingScenario, AllCornersShareOneCurve) {
  // the obstacle ring looks the same after a quarter turn at every instant
  const OrbitWorld& w = orbiting();
  for (int k = 0; k < 200; k += 7) {
    double t = 0.4 * k;
    auto a = value_at(w.f, t, {192, 192});
    ASSERT_TRUE(a);
    for (Vec2 x : {Vec2{-192, 192}, Vec2{-192, -192}, Vec2{192, -192}}) {
      auto b = value_at(w.f, t, x);
      ASSERT_TRUE(b);
      EXPECT_NEAR(*a, *b, 1e-9) << "slice " << k;
    }
  }
}

TEST(OrbitingScenario, DurationsArePeriodic) {
  const OrbitWorld& w = orbiting();
  DurationFunction d = build_duration(w.f, w.s.vtols[2]);
  ASSERT_EQ(d.size(), 564u);  // 563 slices in [0, 225] plus the end point
  for (std::size_t k = 0; k + 200 < d.size(); ++k) {
    if (std::abs(d.times[k + 200] - d.times[k] - 80.0) > 1e-9) continue;  // off-slice end point
    EXPECT_NEAR(d.values[k], d.values[k + 200], 1e-12);
  }
  for (double v : d.values) {
    EXPECT_GT(v, 26.0);
    EXPECT_LT(v, 32.0);
  }
}

TEST(OrbitingScenario, TrajectoriesAvoidObstaclesAndDescend) {
  const OrbitWorld& w = orbiting();
  const GridSpec& g = w.f.grid();
  for (const VtolSpec& vt : w.s.vtols) {
    for (double t0 : {0.0, 4.0 * vt.id, 11.2}) {
      Trajectory tr = extract_trajectory(w.f, w.s, vt.start, t0, vt.id);
      EXPECT_TRUE(verify_no_collision(tr, w.s).empty()) << "vehicle " << vt.id << " t0 " << t0;
      EXPECT_LE(std::abs(tr.duration * vt.velocity - tr.path_length), g.dx + 1e-9);
      for (std::size_t k = 1; k < tr.points.size(); ++k) {
        double before = *value_at(w.f, tr.points[k - 1].t, tr.points[k - 1].x);
        double after = *value_at(w.f, tr.points[k].t, tr.points[k].x);
        EXPECT_LE(after, before + g.dx + 1e-9);
      }
      double planned = *value_at(w.f, t0, vt.start) / vt.velocity;
      EXPECT_NEAR(tr.duration, planned, 2.0) << "vehicle " << vt.id << " t0 " << t0;
    }
  }
}

TEST(OrbitingScenario, PlotDataCoversOnePeriod) {
  std::ostringstream os;
  export_duration_plot_data(os, orbiting().f, 3);
  std::istringstream in(os.str());
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 200);
  EXPECT_THROW(export_duration_plot_data(os, orbiting().f, 99), std::invalid_argument);
}
