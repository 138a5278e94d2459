#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "vtol/duration.hpp"

using namespace vtol;

namespace {

std::string scenario_path(const char* name) { return std::string(VTOL_SCENARIO_DIR) + "/" + name; }

DurationFunction table(std::vector<double> t, std::vector<double> v) {
  DurationFunction d;
  d.vtol_id = 1;
  d.velocity = 10.0;
  d.times = std::move(t);
  d.values = std::move(v);
  return d;
}

DurationFunction sampled(double (*fn)(double), int n) {
  std::vector<double> t, v;
  for (int k = 0; k <= n; ++k) {
    t.push_back(static_cast<double>(k) / n);
    v.push_back(fn(t.back()));
  }
  return table(t, v);
}

// Random table on an irregular time grid; shape 0 = arbitrary, 1 = convex,
// 2 = concave.
DurationFunction random_table(std::mt19937& rng, int shape) {
  std::uniform_int_distribution<int> count(3, 40);
  std::uniform_real_distribution<double> gap(0.1, 2.0), val(20.0, 35.0), slope(-1.0, 1.0);
  int n = count(rng);
  std::vector<double> t{0.0}, v;
  for (int k = 1; k < n; ++k) t.push_back(t.back() + gap(rng));
  if (shape == 0) {
    for (int k = 0; k < n; ++k) v.push_back(val(rng));
  } else {
    // sorted slopes give a convex table; negate for concave
    std::vector<double> s(n - 1);
    for (double& x : s) x = slope(rng);
    std::sort(s.begin(), s.end());
    v.push_back(val(rng));
    for (int k = 1; k < n; ++k) v.push_back(v.back() + s[k - 1] * (t[k] - t[k - 1]));
    if (shape == 2) {
      for (double& x : v) x = 60.0 - x;
    }
  }
  return table(t, v);
}

}  // namespace

TEST(Duration, FreeSpaceIsConstant) {
  Scenario s = load_scenario_file(scenario_path("free_space.json"));
  SolverConfig c;
  c.grid = make_grid(s, 4.0, 64);
  ValueField f = solve(s, c);
  DurationFunction d = build_duration(f, s.vtols.front());
  EXPECT_EQ(d.size(), 201u);  // window [0, 80] at dt = 0.4
  double exact = (std::hypot(192.0, 192.0) - 10.0) / 10.0;
  for (double v : d.values) {
    EXPECT_NEAR(v, exact, 0.05 * exact);
    EXPECT_DOUBLE_EQ(v, d.values.front());
  }
}

TEST(Duration, OffSliceWindowEdgesAreSampled) {
  Scenario s = load_scenario_file(scenario_path("free_space.json"));
  s.vtols.front().t_min = 0.1;
  s.vtols.front().t_max = 2.1;
  SolverConfig c;
  c.grid = make_grid(s, 4.0, 64);
  ValueField f = solve(s, c);
  DurationFunction d = build_duration(f, s.vtols.front());
  ASSERT_EQ(d.size(), 7u);  // 0.1, 0.4, ..., 2.0, 2.1
  EXPECT_DOUBLE_EQ(d.times.front(), 0.1);
  EXPECT_DOUBLE_EQ(d.times.back(), 2.1);
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d.times[k - 1], d.times[k]);
}

TEST(Duration, UnreachableStartNamesVehicle) {
  Scenario s = load_scenario_file(scenario_path("walled.json"));
  SolverConfig c;
  c.grid = make_grid(s, 4.0, 64);
  ValueField f = solve(s, c);
  EXPECT_NO_THROW(build_duration(f, s.vtols[0]));
  try {
    build_duration(f, s.vtols[1]);
    FAIL() << "expected UnreachableError";
  } catch (const UnreachableError& e) {
    EXPECT_EQ(e.vtol_id(), 2);
    EXPECT_NE(std::string(e.what()).find("vehicle 2"), std::string::npos);
  }
}

TEST(Duration, InterpolatesBetweenSamples) {
  DurationFunction d = table({0, 1, 3}, {10, 12, 8});
  EXPECT_DOUBLE_EQ(d(0.5), 11.0);
  EXPECT_DOUBLE_EQ(d(2.0), 10.0);
  EXPECT_DOUBLE_EQ(d(-1.0), 10.0);
  EXPECT_DOUBLE_EQ(d(5.0), 8.0);
  EXPECT_EQ(d.index_of(1.0), 1u);
  EXPECT_THROW(d.index_of(1.5), std::invalid_argument);
  EXPECT_DOUBLE_EQ(d.max_value(), 12.0);
}

TEST(Envelope, LinearHasZeroErrors) {
  DurationFunction d = table({0, 1, 2, 3}, {5, 6, 7, 8});
  EnvelopeBounds e = envelope_errors(d, 0.0, 3.0);
  EXPECT_EQ(e.e_u, 0.0);
  EXPECT_EQ(e.e_o, 0.0);
}

TEST(Envelope, SquareAndNegatedSquare) {
  DurationFunction up = sampled([](double t) { return t * t; }, 1000);
  EnvelopeBounds e = envelope_errors(up, 0.0, 1.0);
  EXPECT_NEAR(e.e_u, 0.0, 1e-12);
  EXPECT_NEAR(e.e_o, 0.25, 1e-12);
  DurationFunction down = sampled([](double t) { return -t * t; }, 1000);
  EnvelopeBounds f = envelope_errors(down, 0.0, 1.0);
  EXPECT_NEAR(f.e_u, 0.25, 1e-12);
  EXPECT_NEAR(f.e_o, 0.0, 1e-12);
}

TEST(Envelope, RejectsOffGridAndReversedIntervals) {
  DurationFunction d = table({0, 1, 2}, {1, 2, 1});
  EXPECT_THROW(envelope_errors(d, 0.5, 2.0), std::invalid_argument);
  EXPECT_THROW(envelope_errors(d, std::size_t{2}, std::size_t{0}), std::invalid_argument);
  EXPECT_THROW(envelope_errors(d, std::size_t{0}, std::size_t{3}), std::invalid_argument);
}

TEST(Envelope, MatchesBruteForceAndBoundsEveryNode) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    DurationFunction d = random_table(rng, trial % 3);
    std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
    std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    EnvelopeBounds e = envelope_errors(d, a, b);
    oracle::Envelope o = oracle::brute_envelope(d.times, d.values, a, b);
    EXPECT_NEAR(e.e_u, o.under, 1e-12);
    EXPECT_NEAR(e.e_o, o.over, 1e-12);
    for (std::size_t k = a; k <= b; ++k) {
      double psi = d.values[a] + (d.values[b] - d.values[a]) * (d.times[k] - d.times[a]) /
                                     (d.times[b] - d.times[a]);
      EXPECT_LE(psi - e.e_o, d.values[k] + 1e-12);
      EXPECT_LE(d.values[k], psi + e.e_u + 1e-12);
    }
  }
}

TEST(Envelope, SubdivisionShrinksConvexAndConcaveEnvelopes) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 400; ++trial) {
    DurationFunction d = random_table(rng, 1 + trial % 2);
    std::size_t n = d.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t a = pick(rng), b = pick(rng);
    if (a > b) std::swap(a, b);
    if (b < a + 2) continue;
    std::size_t m = std::uniform_int_distribution<std::size_t>(a + 1, b - 1)(rng);
    double parent = envelope_errors(d, a, b).max_error();
    EXPECT_LE(envelope_errors(d, a, m).max_error(), parent + 1e-12);
    EXPECT_LE(envelope_errors(d, m, b).max_error(), parent + 1e-12);
  }
}

// Without convexity a child secant can tilt away from the data, so a split
// may widen the envelope. The refinement loop tolerates this.
TEST(Envelope, SubdivisionCanWidenNonConvexEnvelope) {
  DurationFunction d = table({0, 1, 2, 3}, {0, -1, 1, 0});
  double parent = envelope_errors(d, std::size_t{0}, std::size_t{3}).max_error();
  double child = envelope_errors(d, std::size_t{0}, std::size_t{2}).max_error();
  EXPECT_LT(parent, child);
}

TEST(DurationCsv, HeaderAndPrecision) {
  DurationFunction d = table({0, 0.4}, {26.5, 27.25});
  std::ostringstream os;
  write_duration_csv(os, d);
  EXPECT_EQ(os.str(), "t_seconds,duration_seconds\n0.000000,26.5000000000\n0.400000,27.2500000000\n");
}
