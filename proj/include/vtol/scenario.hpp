#ifndef VTOL_SCENARIO_HPP_
#define VTOL_SCENARIO_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vtol/error.hpp"

namespace vtol {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Bounds {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  bool contains(Vec2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

struct TargetSpec {
  Vec2 center;
  double radius = 0.0;
};

enum class Direction { kCounterClockwise, kClockwise };

struct ObstacleSpec {
  double orbit_radius = 0.0;     // R_C, meters
  double obstacle_radius = 0.0;  // R_O, meters
  double period = 0.0;           // seconds per full revolution
  double initial_phase = 0.0;    // radians
  Vec2 orbit_center;
  Direction direction = Direction::kCounterClockwise;
};

struct VtolSpec {
  int id = 0;
  Vec2 start;
  double velocity = 0.0;  // m/s
  double t_min = 0.0;
  double t_max = 0.0;
};

enum class ModeKind { kPeriodic, kStaticAfter };

// Either all obstacles repeat with a global period, or they freeze at t_star.
struct Mode {
  ModeKind kind = ModeKind::kPeriodic;
  double period = 0.0;  // periodic only
  double t_star = 0.0;  // static_after only

  static Mode periodic(double period) { return {ModeKind::kPeriodic, period, 0.0}; }
  static Mode static_after(double t_star) {
    return {ModeKind::kStaticAfter, 0.0, t_star};
  }
};

enum class Region { kOutside, kObstacle, kTarget, kFree };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::kOutside: return "outside";
    case Region::kObstacle: return "obstacle";
    case Region::kTarget: return "target";
    case Region::kFree: return "free";
  }
  return "?";
}

// Slack applied to disk membership tests so that grid nodes lying exactly on a
// disk boundary classify identically under the scenario's rotational symmetry.
inline constexpr double kGeometryTol = 1e-9;

// Center of a circling obstacle at time t (t >= 0). Exactly T-periodic.
inline Vec2 obstacle_position(const ObstacleSpec& ob, double t) {
  double cycles = std::fmod(t, ob.period) / ob.period;
  double sign = ob.direction == Direction::kCounterClockwise ? 1.0 : -1.0;
  double theta = ob.initial_phase + sign * 2.0 * std::numbers::pi * cycles;
  return ob.orbit_center + ob.orbit_radius * Vec2{std::cos(theta), std::sin(theta)};
}

struct Scenario {
  Bounds bounds;
  TargetSpec target;
  std::vector<ObstacleSpec> obstacles;
  std::vector<VtolSpec> vtols;
  Mode mode;

  // Obstacle clock: frozen at t_star in static_after mode.
  double obstacle_time(double t) const {
    return mode.kind == ModeKind::kStaticAfter ? std::min(t, mode.t_star) : t;
  }

  Vec2 obstacle_center(std::size_t p, double t) const {
    return obstacle_position(obstacles[p], obstacle_time(t));
  }

  const VtolSpec* find_vtol(int id) const {
    auto it = std::find_if(vtols.begin(), vtols.end(),
                           [id](const VtolSpec& v) { return v.id == id; });
    return it == vtols.end() ? nullptr : &*it;
  }
};

// Precedence: Outside > Obstacle > Target > Free.
inline Region classify_point(const Scenario& s, Vec2 x, double t) {
  if (!s.bounds.contains(x)) return Region::kOutside;
  for (std::size_t p = 0; p < s.obstacles.size(); ++p) {
    if (distance(x, s.obstacle_center(p, t)) <=
        s.obstacles[p].obstacle_radius + kGeometryTol) {
      return Region::kObstacle;
    }
  }
  if (distance(x, s.target.center) <= s.target.radius + kGeometryTol) {
    return Region::kTarget;
  }
  return Region::kFree;
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ScenarioError(msg);
}

inline bool divides(double part, double whole) {
  double q = whole / part;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q) && q >= 1.0 - 1e-9;
}

}  // namespace detail

// Checks every scenario invariant; throws ScenarioError on the first failure.
inline void validate(const Scenario& s) {
  using detail::require;
  const Bounds& b = s.bounds;
  require(std::isfinite(b.xmin) && std::isfinite(b.xmax) && std::isfinite(b.ymin) &&
              std::isfinite(b.ymax) && b.xmin < b.xmax && b.ymin < b.ymax,
          "bounds must be finite with xmin < xmax and ymin < ymax");

  const TargetSpec& tg = s.target;
  require(tg.radius > 0.0, "target radius must be positive");
  require(tg.center.x - tg.radius >= b.xmin && tg.center.x + tg.radius <= b.xmax &&
              tg.center.y - tg.radius >= b.ymin && tg.center.y + tg.radius <= b.ymax,
          "target disk must lie inside the domain bounds");

  if (s.mode.kind == ModeKind::kPeriodic) {
    require(s.mode.period > 0.0, "periodic mode requires a positive period");
  } else {
    require(s.mode.t_star >= 0.0, "static_after mode requires t_star >= 0");
  }

  for (std::size_t p = 0; p < s.obstacles.size(); ++p) {
    const ObstacleSpec& ob = s.obstacles[p];
    std::string tag = "obstacle " + std::to_string(p + 1) + ": ";
    require(ob.period > 0.0, tag + "period must be positive");
    require(ob.obstacle_radius > 0.0, tag + "obstacle_radius must be positive");
    require(ob.orbit_radius >= 0.0, tag + "orbit_radius must be non-negative");
    double reach = ob.orbit_radius + ob.obstacle_radius;
    require(ob.orbit_center.x - reach >= b.xmin && ob.orbit_center.x + reach <= b.xmax &&
                ob.orbit_center.y - reach >= b.ymin && ob.orbit_center.y + reach <= b.ymax,
            tag + "obstacle leaves the domain along its orbit");
    if (s.mode.kind == ModeKind::kPeriodic) {
      require(detail::divides(ob.period, s.mode.period),
              tag + "period does not divide the global period");
    }
  }

  require(!s.vtols.empty(), "scenario needs at least one vehicle");
  std::set<int> ids;
  for (const VtolSpec& v : s.vtols) {
    std::string tag = "vehicle " + std::to_string(v.id) + ": ";
    require(v.id >= 0, tag + "id must be non-negative");
    require(ids.insert(v.id).second, tag + "duplicate id");
    require(v.velocity > 0.0, tag + "velocity must be positive");
    require(v.t_min < v.t_max, tag + "window requires t_min < t_max");
    require(v.t_min >= 0.0, tag + "window must start at t >= 0");
    require(b.contains(v.start), tag + "start lies outside the domain");
  }
}

namespace detail {

using nlohmann::json;

inline double number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ScenarioError(where + ": missing numeric key '" + key + "'");
  }
  return it->get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback,
                        const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline const json& object(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_object()) {
    throw ScenarioError(std::string("missing object '") + key + "'");
  }
  return *it;
}

}  // namespace detail

// Parses and validates scenario JSON text. Units: meters, seconds, degrees.
inline Scenario load_scenario(const std::string& text) {
  using detail::json;
  using detail::number;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");

  Scenario s;
  const json& b = detail::object(doc, "bounds");
  s.bounds = {number(b, "xmin", "bounds"), number(b, "xmax", "bounds"),
              number(b, "ymin", "bounds"), number(b, "ymax", "bounds")};

  const json& t = detail::object(doc, "target");
  s.target = {{number(t, "cx", "target"), number(t, "cy", "target")},
              number(t, "radius", "target")};

  const json& m = detail::object(doc, "mode");
  std::string kind = m.value("kind", "");
  if (kind == "periodic") {
    s.mode = Mode::periodic(number(m, "period", "mode"));
  } else if (kind == "static_after") {
    s.mode = Mode::static_after(number(m, "t_star", "mode"));
  } else {
    throw ScenarioError("mode.kind must be \"periodic\" or \"static_after\"");
  }

  if (doc.contains("obstacles")) {
    const json& obs = doc["obstacles"];
    if (!obs.is_array()) throw ScenarioError("'obstacles' must be an array");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const json& o = obs[i];
      std::string where = "obstacles[" + std::to_string(i) + "]";
      ObstacleSpec ob;
      ob.orbit_radius = number(o, "orbit_radius", where);
      ob.obstacle_radius = number(o, "obstacle_radius", where);
      ob.period = number(o, "period", where);
      ob.initial_phase = number(o, "phase_deg", where) * std::numbers::pi / 180.0;
      ob.orbit_center = {detail::number_or(o, "orbit_cx", s.target.center.x, where),
                         detail::number_or(o, "orbit_cy", s.target.center.y, where)};
      std::string dir = o.value("direction", "ccw");
      if (dir == "ccw") {
        ob.direction = Direction::kCounterClockwise;
      } else if (dir == "cw") {
        ob.direction = Direction::kClockwise;
      } else {
        throw ScenarioError(where + ": direction must be \"ccw\" or \"cw\"");
      }
      s.obstacles.push_back(ob);
    }
  }

  if (!doc.contains("vtols") || !doc["vtols"].is_array()) {
    throw ScenarioError("missing array 'vtols'");
  }
  const json& vs = doc["vtols"];
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const json& v = vs[i];
    std::string where = "vtols[" + std::to_string(i) + "]";
    if (!v.contains("id") || !v["id"].is_number_integer()) {
      throw ScenarioError(where + ": missing integer key 'id'");
    }
    VtolSpec spec;
    spec.id = v["id"].get<int>();
    spec.start = {number(v, "x", where), number(v, "y", where)};
    spec.velocity = number(v, "velocity", where);
    spec.t_min = number(v, "t_min", where);
    spec.t_max = number(v, "t_max", where);
    s.vtols.push_back(spec);
  }

  validate(s);
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

}  // namespace vtol

#endif  // VTOL_SCENARIO_HPP_
