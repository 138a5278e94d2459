#ifndef VTOL_HJB_HPP_
#define VTOL_HJB_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vtol/error.hpp"
#include "vtol/scenario.hpp"

namespace vtol {

// Interpolated transformed values at or below this read as "unreachable".
inline constexpr double kValueFloor = 1e-12;

// Length scale of the Kruzkov transform v = exp(-V / scale). Paths up to
// scale * ln(1 / kValueFloor), about 690 m, stay above the floor. Smaller
// scales shrink the interpolation penalty next to obstacles.
inline constexpr double kDefaultLengthScale = 25.0;

// Space-time lattice. One step moves dx meters in dt = dx / velocity seconds.
struct GridSpec {
  double dx = 4.0;
  int nx = 0;  // cells along x; nodes are 0..nx
  int ny = 0;
  double dt = 0.0;
  int n_slices = 0;  // periodic: K (slice K wraps to 0); static: K + 1
  int n_controls = 64;
  double xmin = 0.0;
  double ymin = 0.0;
  ModeKind mode = ModeKind::kPeriodic;

  // K: slice index of the horizon (periodic: K * dt == period).
  int horizon() const { return mode == ModeKind::kPeriodic ? n_slices : n_slices - 1; }
  double slice_time(int k) const { return k * dt; }
  Vec2 node(int ix, int iy) const { return {xmin + ix * dx, ymin + iy * dx}; }
};

// Builds the lattice for a scenario; every vehicle must share one velocity.
inline GridSpec make_grid(const Scenario& s, double dx, int n_controls) {
  if (!(dx > 0.0)) throw std::invalid_argument("grid step dx must be positive");
  if (n_controls < 8) throw std::invalid_argument("need at least 8 headings");
  if (s.vtols.empty()) throw std::invalid_argument("scenario has no vehicles");

  double velocity = s.vtols.front().velocity;
  for (const VtolSpec& v : s.vtols) {
    if (std::abs(v.velocity - velocity) > 1e-12 * velocity) {
      throw std::invalid_argument(
          "all vehicles must share one velocity to couple grid space and time");
    }
  }

  auto cells = [dx](double lo, double hi, const char* axis) {
    double n = (hi - lo) / dx;
    long r = std::lround(n);
    if (std::abs(n - r) > 1e-9 * std::max(1.0, n) || r < 2) {
      throw std::invalid_argument(std::string("domain extent along ") + axis +
                                  " is not a multiple of dx");
    }
    return static_cast<int>(r);
  };

  GridSpec g;
  g.dx = dx;
  g.nx = cells(s.bounds.xmin, s.bounds.xmax, "x");
  g.ny = cells(s.bounds.ymin, s.bounds.ymax, "y");
  g.dt = dx / velocity;
  g.n_controls = n_controls;
  g.xmin = s.bounds.xmin;
  g.ymin = s.bounds.ymin;
  g.mode = s.mode.kind;
  if (s.mode.kind == ModeKind::kPeriodic) {
    double k = s.mode.period / g.dt;
    long kr = std::lround(k);
    if (std::abs(k - kr) > 1e-9 * std::max(1.0, k) || kr < 1) {
      std::ostringstream ss;
      ss << "global period " << s.mode.period << " s is not a multiple of dt = " << g.dt
         << " s";
      throw std::invalid_argument(ss.str());
    }
    g.n_slices = static_cast<int>(kr);
  } else {
    // smallest K with K * dt > t_star
    int k = static_cast<int>(std::floor(s.mode.t_star / g.dt)) + 1;
    g.n_slices = k + 1;
  }
  return g;
}

struct SolverConfig {
  double convergence_tol = 1e-9;  // sup-norm change of the transformed values
  long max_sweeps = 0;            // 0 selects 10 * (nx + ny + K)
  double length_scale = kDefaultLengthScale;
  int threads = 0;  // 0 selects hardware concurrency
  GridSpec grid;
};

inline long effective_max_sweeps(const SolverConfig& c) {
  if (c.max_sweeps > 0) return c.max_sweeps;
  return 10L * (c.grid.nx + c.grid.ny + c.grid.horizon());
}

namespace detail {

struct StencilTerm {
  std::ptrdiff_t offset;  // padded linear offset within a slice
  double weight;
};

// Bilinear stencil of the landing point x + dx * (cos a_j, sin a_j) for each
// heading. The step equals the grid spacing, so the stencil is node-invariant.
inline std::vector<std::vector<StencilTerm>> heading_stencils(int n_controls,
                                                              std::ptrdiff_t stride) {
  auto snap = [](double c) {
    double r = std::round(c);
    return std::abs(c - r) < 1e-12 ? r : c;
  };
  std::vector<std::vector<StencilTerm>> out(n_controls);
  for (int j = 0; j < n_controls; ++j) {
    double angle = 2.0 * std::numbers::pi * j / n_controls;
    double ux = snap(std::cos(angle));
    double uy = snap(std::sin(angle));
    int fx = static_cast<int>(std::floor(ux));
    int fy = static_cast<int>(std::floor(uy));
    double ax = ux - fx;
    double ay = uy - fy;
    const std::array<std::tuple<int, int, double>, 4> corners = {{
        {fx, fy, (1 - ax) * (1 - ay)},
        {fx + 1, fy, ax * (1 - ay)},
        {fx, fy + 1, (1 - ax) * ay},
        {fx + 1, fy + 1, ax * ay},
    }};
    for (const auto& [cx, cy, w] : corners) {
      if (w > 0.0) out[j].push_back({cx * stride + cy, w});
    }
  }
  return out;
}

// Fraction in (0, 1] of the segment from -> from + step at which it first
// enters the disk, or nullopt if it misses. `from` must lie outside the disk.
inline std::optional<double> disk_entry_fraction(Vec2 from, Vec2 step, Vec2 center,
                                                 double radius) {
  Vec2 rel = from - center;
  double a = step.x * step.x + step.y * step.y;
  double b = 2.0 * (rel.x * step.x + rel.y * step.y);
  double c = rel.x * rel.x + rel.y * rel.y - radius * radius;
  if (c <= 0.0) return 0.0;
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  double lam = (-b - std::sqrt(disc)) / (2.0 * a);
  if (lam < 0.0 || lam > 1.0 + 1e-12) return std::nullopt;
  return std::min(lam, 1.0);
}

inline Vec2 heading(int j, int n_controls) {
  double angle = 2.0 * std::numbers::pi * j / n_controls;
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace detail

// Kruzkov-transformed value function on the (slice, node) lattice.
//
// Storage is slice-major with a one-node ring of zeros around every slice so
// that landing points just outside the domain read v = 0 without branching.
class ValueField {
 public:
  ValueField() = default;
  ValueField(Scenario scenario, GridSpec grid, double length_scale)
      : scenario_(std::move(scenario)),
        grid_(grid),
        length_scale_(length_scale),
        stride_(grid.ny + 3),
        slice_size_(static_cast<std::size_t>(grid.nx + 3) * (grid.ny + 3)),
        values_(slice_size_ * grid.n_slices, 0.0),
        regions_(slice_size_ * grid.n_slices, static_cast<std::uint8_t>(Region::kOutside)) {}

  const Scenario& scenario() const { return scenario_; }
  const GridSpec& grid() const { return grid_; }
  ModeKind mode() const { return grid_.mode; }
  double length_scale() const { return length_scale_; }
  int n_slices() const { return grid_.n_slices; }

  double v(int k, int ix, int iy) const { return values_[index(k, ix, iy)]; }
  Region region(int k, int ix, int iy) const {
    return static_cast<Region>(regions_[index(k, ix, iy)]);
  }

  // Back-transformed node value in meters; nullopt encodes V = infinity.
  std::optional<double> node_value(int k, int ix, int iy) const {
    return to_length(v(k, ix, iy));
  }

  std::optional<double> to_length(double transformed) const {
    if (transformed <= kValueFloor) return std::nullopt;
    return -length_scale_ * std::log(std::min(transformed, 1.0));
  }

  // Period of the time axis (periodic mode only).
  double period() const { return grid_.dt * grid_.n_slices; }

  // Slice pair and weight for time t: value = (1 - a) * slice k0 + a * slice k1.
  std::tuple<int, int, double> time_bracket(double t) const {
    double s;
    if (grid_.mode == ModeKind::kPeriodic) {
      s = std::fmod(t, period()) / grid_.dt;
    } else {
      s = t / grid_.dt;
    }
    double r = std::round(s);
    if (std::abs(s - r) < 1e-9) s = r;
    if (grid_.mode == ModeKind::kPeriodic) {
      int k0 = static_cast<int>(std::floor(s)) % grid_.n_slices;
      double a = s - std::floor(s);
      return {k0, (k0 + 1) % grid_.n_slices, a};
    }
    int last = grid_.n_slices - 1;
    if (s >= last) return {last, last, 0.0};
    int k0 = static_cast<int>(std::floor(s));
    return {k0, k0 + 1, s - k0};
  }

  // Bilinear interpolation of v inside slice k; x must lie within bounds.
  double interpolate_slice(int k, Vec2 x) const {
    double gx = (x.x - grid_.xmin) / grid_.dx;
    double gy = (x.y - grid_.ymin) / grid_.dx;
    int ix = std::clamp(static_cast<int>(std::floor(gx)), 0, grid_.nx - 1);
    int iy = std::clamp(static_cast<int>(std::floor(gy)), 0, grid_.ny - 1);
    double ax = std::clamp(gx - ix, 0.0, 1.0);
    double ay = std::clamp(gy - iy, 0.0, 1.0);
    return (1 - ax) * (1 - ay) * v(k, ix, iy) + ax * (1 - ay) * v(k, ix + 1, iy) +
           (1 - ax) * ay * v(k, ix, iy + 1) + ax * ay * v(k, ix + 1, iy + 1);
  }

  double interpolate(double t, Vec2 x) const {
    auto [k0, k1, a] = time_bracket(t);
    double v0 = interpolate_slice(k0, x);
    if (a == 0.0) return v0;
    return (1 - a) * v0 + a * interpolate_slice(k1, x);
  }

 private:
  friend ValueField init_field(const Scenario&, const GridSpec&, double);
  friend std::pair<ValueField, double> sweep(const ValueField&, const Scenario&);
  friend double sweep_into(const ValueField&, ValueField&, int);
  friend ValueField init_field_masked(const Scenario&, const GridSpec&,
                                      const std::vector<char>&, double);
  friend ValueField iterate(ValueField, const SolverConfig&, long*, double*);

  std::size_t index(int k, int ix, int iy) const {
    return k * slice_size_ + static_cast<std::size_t>(ix + 1) * stride_ + (iy + 1);
  }

  Scenario scenario_;
  GridSpec grid_;
  double length_scale_ = kDefaultLengthScale;
  std::ptrdiff_t stride_ = 0;
  std::size_t slice_size_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> regions_;
  // Per node (padded slice layout): best transformed value of a single step
  // that ends inside the target, charging only the part flown outside it.
  std::vector<double> target_entry_;
  // Most negative per-node change seen by sweep_into (0 when monotone).
  double monotone_violation_ = 0.0;
};

// Classifies every node of every slice and sets the initial guess
// (1 on the target, 0 elsewhere).
inline ValueField init_field(const Scenario& s, const GridSpec& g,
                             double length_scale = kDefaultLengthScale) {
  if (g.mode != s.mode.kind) {
    throw std::invalid_argument("grid mode does not match scenario mode");
  }
  if (s.mode.kind == ModeKind::kPeriodic &&
      std::abs(g.n_slices * g.dt - s.mode.period) > 1e-9 * s.mode.period) {
    throw std::invalid_argument("grid slices do not span the global period");
  }
  if (s.mode.kind == ModeKind::kStaticAfter && !(g.horizon() * g.dt > s.mode.t_star)) {
    throw std::invalid_argument("grid horizon must exceed t_star");
  }
  if (!(length_scale > 0.0)) throw std::invalid_argument("length scale must be positive");

  ValueField f(s, g, length_scale);
  for (int k = 0; k < g.n_slices; ++k) {
    double t = g.slice_time(k);
    for (int ix = 0; ix <= g.nx; ++ix) {
      for (int iy = 0; iy <= g.ny; ++iy) {
        std::size_t idx = f.index(k, ix, iy);
        Region r = classify_point(s, g.node(ix, iy), t);
        f.regions_[idx] = static_cast<std::uint8_t>(r);
        f.values_[idx] = r == Region::kTarget ? 1.0 : 0.0;
      }
    }
  }

  f.target_entry_.assign(f.slice_size_, 0.0);
  for (int ix = 0; ix <= g.nx; ++ix) {
    for (int iy = 0; iy <= g.ny; ++iy) {
      Vec2 x = g.node(ix, iy);
      if (distance(x, s.target.center) > s.target.radius + g.dx + 1e-9) continue;
      double best = 0.0;
      for (int j = 0; j < g.n_controls; ++j) {
        auto hit = detail::disk_entry_fraction(x, g.dx * detail::heading(j, g.n_controls),
                                               s.target.center, s.target.radius);
        if (hit) best = std::max(best, std::exp(-*hit * g.dx / length_scale));
      }
      f.target_entry_[f.index(0, ix, iy)] = best;
    }
  }
  return f;
}

// One Jacobi update of every free node from `src` into `dst` (same layout;
// non-free entries of dst must already equal src). Returns max |dst - src|.
inline double sweep_into(const ValueField& src, ValueField& dst, int threads = 1) {
  const GridSpec& g = src.grid_;
  const auto stencils = detail::heading_stencils(g.n_controls, src.stride_);
  const double decay = std::exp(-g.dx / src.length_scale_);
  const int n_slices = g.n_slices;
  const bool periodic = g.mode == ModeKind::kPeriodic;
  const std::size_t n_headings = stencils.size();
  const int row_len = g.ny + 1;

  // Every heading padded to four terms (zero weights on unused corners) so the
  // row loop below has a fixed shape and vectorizes.
  std::vector<std::ptrdiff_t> offs(4 * n_headings, 0);
  std::vector<double> wts(4 * n_headings, 0.0);
  for (std::size_t j = 0; j < n_headings; ++j) {
    for (std::size_t q = 0; q < stencils[j].size(); ++q) {
      offs[4 * j + q] = stencils[j][q].offset;
      wts[4 * j + q] = stencils[j][q].weight;
    }
  }

  auto run = [&](int k_begin, int k_end, double& delta_out, double& drop_out) {
    double delta = 0.0;
    double drop = 0.0;
    std::vector<double> best(row_len);
    for (int k = k_begin; k < k_end; ++k) {
      int next = k + 1;
      if (next == n_slices) next = periodic ? 0 : k;
      const std::size_t slice_off = k * src.slice_size_;
      const double* nv = src.values_.data() + next * src.slice_size_;
      const double* cur = src.values_.data() + slice_off;
      const std::uint8_t* reg = src.regions_.data() + slice_off;
      const double* entry = src.target_entry_.data();
      double* out = dst.values_.data() + slice_off;
      for (int ix = 0; ix <= g.nx; ++ix) {
        const std::size_t row = static_cast<std::size_t>(ix + 1) * src.stride_ + 1;
        const double* base = nv + row;
        std::fill(best.begin(), best.end(), 0.0);
        for (std::size_t j = 0; j < n_headings; ++j) {
          const double* p0 = base + offs[4 * j];
          const double* p1 = base + offs[4 * j + 1];
          const double* p2 = base + offs[4 * j + 2];
          const double* p3 = base + offs[4 * j + 3];
          const double w0 = wts[4 * j], w1 = wts[4 * j + 1];
          const double w2 = wts[4 * j + 2], w3 = wts[4 * j + 3];
          for (int iy = 0; iy < row_len; ++iy) {
            double acc = w0 * p0[iy] + w1 * p1[iy] + w2 * p2[iy] + w3 * p3[iy];
            best[iy] = best[iy] > acc ? best[iy] : acc;
          }
        }
        for (int iy = 0; iy < row_len; ++iy) {
          if (reg[row + iy] != static_cast<std::uint8_t>(Region::kFree)) continue;
          double updated = std::max(decay * best[iy], entry[row + iy]);
          double diff = updated - cur[row + iy];
          delta = std::max(delta, std::abs(diff));
          drop = std::min(drop, diff);
          out[row + iy] = updated;
        }
      }
    }
    delta_out = delta;
    drop_out = drop;
  };

  if (threads <= 1 || n_slices < 2) {
    double delta = 0.0, drop = 0.0;
    run(0, n_slices, delta, drop);
    if (drop < 0.0) dst.monotone_violation_ = std::min(dst.monotone_violation_, drop);
    return delta;
  }
  int workers = std::min(threads, n_slices);
  std::vector<double> deltas(workers, 0.0), drops(workers, 0.0);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    int kb = static_cast<int>(static_cast<long>(n_slices) * w / workers);
    int ke = static_cast<int>(static_cast<long>(n_slices) * (w + 1) / workers);
    pool.emplace_back(run, kb, ke, std::ref(deltas[w]), std::ref(drops[w]));
  }
  for (auto& th : pool) th.join();
  double drop = *std::min_element(drops.begin(), drops.end());
  if (drop < 0.0) dst.monotone_violation_ = std::min(dst.monotone_violation_, drop);
  return *std::max_element(deltas.begin(), deltas.end());
}

// One Jacobi sweep; returns the updated field and the sup-norm change.
inline std::pair<ValueField, double> sweep(const ValueField& f, const Scenario& s) {
  (void)s;  // regions were fixed at init_field
  ValueField next = f;
  double delta = sweep_into(f, next, 1);
  return {std::move(next), delta};
}

// Static field whose obstacles are an explicit node mask (blocked[ix * (ny + 1)
// + iy] != 0) instead of the scenario's circles. Blocked nodes stay at v = 0.
inline ValueField init_field_masked(const Scenario& s, const GridSpec& g,
                                    const std::vector<char>& blocked,
                                    double length_scale = kDefaultLengthScale) {
  if (g.mode != ModeKind::kStaticAfter) {
    throw std::invalid_argument("masked fields are static");
  }
  if (blocked.size() != static_cast<std::size_t>(g.nx + 1) * (g.ny + 1)) {
    throw std::invalid_argument("mask size does not match the grid");
  }
  ValueField f = init_field(s, g, length_scale);
  for (int ix = 0; ix <= g.nx; ++ix) {
    for (int iy = 0; iy <= g.ny; ++iy) {
      if (!blocked[static_cast<std::size_t>(ix) * (g.ny + 1) + iy]) continue;
      for (int k = 0; k < g.n_slices; ++k) {
        std::size_t idx = f.index(k, ix, iy);
        f.regions_[idx] = static_cast<std::uint8_t>(Region::kObstacle);
        f.values_[idx] = 0.0;
      }
      f.target_entry_[f.index(0, ix, iy)] = 0.0;
    }
  }
  return f;
}

// Fixed-point iteration from an initialized field until the sup-norm change
// falls below convergence_tol. Throws ConvergenceError after max_sweeps.
inline ValueField iterate(ValueField a, const SolverConfig& c, long* sweeps_out = nullptr,
                          double* delta_out = nullptr) {
  if (!(c.convergence_tol > 0.0)) {
    throw std::invalid_argument("convergence_tol must be positive");
  }
  int threads = c.threads > 0 ? c.threads
                              : std::max(1u, std::thread::hardware_concurrency());
  ValueField b = a;
  SolverConfig own = c;
  own.grid = a.grid();
  long limit = effective_max_sweeps(own);
  double delta = 1.0;
  long m = 0;
  while (m < limit) {
    delta = sweep_into(a, b, threads);
    ++m;
    std::swap(a, b);
    if (delta < c.convergence_tol) break;
  }
  if (a.monotone_violation_ < 0.0 || b.monotone_violation_ < 0.0) {
    throw NumericalError("value iteration lost monotonicity");
  }
  if (sweeps_out) *sweeps_out = m;
  if (delta_out) *delta_out = delta;
  if (delta >= c.convergence_tol) {
    std::ostringstream ss;
    ss << "value iteration did not converge in " << m << " sweeps (delta " << delta << ")";
    throw ConvergenceError(delta, m, ss.str());
  }
  return a;
}

inline ValueField solve(const Scenario& s, const SolverConfig& c, long* sweeps_out = nullptr,
                        double* delta_out = nullptr) {
  return iterate(init_field(s, c.grid, c.length_scale), c, sweeps_out, delta_out);
}

// Shortest admissible path length (meters) from x departing at time t.
// nullopt means unreachable. Throws std::out_of_range if x is outside bounds.
inline std::optional<double> value_at(const ValueField& f, double t, Vec2 x) {
  const Scenario& s = f.scenario();
  Region r = classify_point(s, x, t);
  if (r == Region::kOutside) {
    std::ostringstream ss;
    ss << "query point (" << x.x << ", " << x.y << ") lies outside the domain";
    throw std::out_of_range(ss.str());
  }
  if (r == Region::kObstacle) return std::nullopt;
  if (r == Region::kTarget) return 0.0;
  return f.to_length(f.interpolate(t, x));
}

// CSV dump: one comment header line, a column header, one record per node.
inline void write_field_csv(std::ostream& os, const ValueField& f) {
  const GridSpec& g = f.grid();
  os << "# K=" << g.n_slices << ",nx=" << g.nx << ",ny=" << g.ny << ",dx=" << g.dx
     << ",dt=" << g.dt << ",mode="
     << (g.mode == ModeKind::kPeriodic ? "periodic" : "static_after")
     << ",length_scale=" << f.length_scale() << "\n";
  os << "k,ix,iy,v,V\n";
  os.precision(17);
  for (int k = 0; k < g.n_slices; ++k) {
    for (int ix = 0; ix <= g.nx; ++ix) {
      for (int iy = 0; iy <= g.ny; ++iy) {
        double v = f.v(k, ix, iy);
        auto len = f.to_length(v);
        os << k << ',' << ix << ',' << iy << ',' << v << ',';
        if (len) {
          os << *len;
        } else {
          os << "inf";
        }
        os << '\n';
      }
    }
  }
}

}  // namespace vtol

#endif  // VTOL_HJB_HPP_
