#ifndef VTOL_DURATION_HPP_
#define VTOL_DURATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "vtol/error.hpp"
#include "vtol/hjb.hpp"

namespace vtol {

// Flight duration D(t) in seconds, piecewise linear over fine sample times.
struct DurationFunction {
  int vtol_id = 0;
  double velocity = 1.0;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  double t_min() const { return times.front(); }
  double t_max() const { return times.back(); }

  double operator()(double t) const {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t b = static_cast<std::size_t>(it - times.begin());
    std::size_t a = b - 1;
    double w = (t - times[a]) / (times[b] - times[a]);
    return (1.0 - w) * values[a] + w * values[b];
  }

  // Index of the sample at time t; throws if t is not a sample time.
  std::size_t index_of(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
    if (it == times.end() || std::abs(*it - t) > 1e-9) {
      std::ostringstream ss;
      ss << "time " << t << " s is not a fine-grid node of vehicle " << vtol_id;
      throw std::invalid_argument(ss.str());
    }
    return static_cast<std::size_t>(it - times.begin());
  }

  double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

// Samples D_i = V(t, start) / v at every slice time inside the vehicle's
// window plus both window edges.
inline DurationFunction build_duration(const ValueField& f, const VtolSpec& vt) {
  const GridSpec& g = f.grid();
  DurationFunction d;
  d.vtol_id = vt.id;
  d.velocity = vt.velocity;

  std::vector<double> ts;
  ts.push_back(vt.t_min);
  long k0 = static_cast<long>(std::ceil(vt.t_min / g.dt - 1e-9));
  for (long k = k0;; ++k) {
    double t = k * g.dt;
    if (t > vt.t_max + 1e-9) break;
    if (std::abs(t - ts.back()) <= 1e-9) continue;
    ts.push_back(std::abs(t - vt.t_max) <= 1e-9 ? vt.t_max : t);
  }
  if (ts.back() < vt.t_max - 1e-9) ts.push_back(vt.t_max);

  for (double t : ts) {
    std::optional<double> len;
    try {
      len = value_at(f, t, vt.start);
    } catch (const std::out_of_range&) {
      len = std::nullopt;
    }
    if (!len) {
      std::ostringstream ss;
      ss << "vehicle " << vt.id << " cannot reach the target when departing at t = " << t
         << " s";
      throw UnreachableError(vt.id, t, ss.str());
    }
    d.times.push_back(t);
    d.values.push_back(*len / vt.velocity);
  }
  return d;
}

struct EnvelopeBounds {
  double t_a = 0.0;
  double t_b = 0.0;
  double e_u = 0.0;  // max of D above the secant
  double e_o = 0.0;  // max of the secant above D
  double max_error() const { return std::max(e_u, e_o); }
};

// Exact envelope errors of the secant through samples a < b.
inline EnvelopeBounds envelope_errors(const DurationFunction& d, std::size_t a, std::size_t b) {
  if (!(a < b && b < d.size())) throw std::invalid_argument("bad envelope interval");
  EnvelopeBounds e{d.times[a], d.times[b], 0.0, 0.0};
  double ta = d.times[a], tb = d.times[b];
  double da = d.values[a], db = d.values[b];
  for (std::size_t k = a + 1; k < b; ++k) {
    double w = (d.times[k] - ta) / (tb - ta);
    double secant = (1.0 - w) * da + w * db;
    double diff = d.values[k] - secant;
    e.e_u = std::max(e.e_u, diff);
    e.e_o = std::max(e.e_o, -diff);
  }
  return e;
}

inline EnvelopeBounds envelope_errors(const DurationFunction& d, double t_a, double t_b) {
  return envelope_errors(d, d.index_of(t_a), d.index_of(t_b));
}

inline void write_duration_csv(std::ostream& os, const DurationFunction& d) {
  os << "t_seconds,duration_seconds\n";
  char buf[96];
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f,%.10f\n", d.times[k], d.values[k]);
    os << buf;
  }
}

}  // namespace vtol

#endif  // VTOL_DURATION_HPP_
