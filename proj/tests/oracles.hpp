// Independent reference solvers used by the tests. None of them share code
// with the library beyond plain data types.
#ifndef VTOL_TESTS_ORACLES_HPP_
#define VTOL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Axis-aligned closed box in node coordinates.
struct Box {
  int x0, y0, x1, y1;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// Segment-box intersection by parametric clipping (Liang-Barsky). A blocked
// node owns its whole cell, so the box is grown by half a cell.
inline bool segment_hits(const Box& b, double ax, double ay, double bx, double by) {
  const double x0 = b.x0 - 0.5, x1 = b.x1 + 0.5, y0 = b.y0 - 0.5, y1 = b.y1 + 0.5;
  double t0 = 0.0, t1 = 1.0;
  double dx = bx - ax, dy = by - ay;
  auto clip = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    double r = q / p;
    if (p < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
    return true;
  };
  return clip(-dx, ax - x0) && clip(dx, x1 - ax) && clip(-dy, ay - y0) && clip(dy, y1 - ay) &&
         t0 <= t1;
}

// Shortest path lengths on an (n+1) x (n+1) node lattice with spacing h,
// 16-neighbor moves with Euclidean lengths, obstacles given as boxes. The
// target is the disk (cx, cy, r) in node coordinates: nodes inside have
// distance 0 and a node within one step of it starts at its straight-line
// distance to the disk boundary.
inline std::vector<double> dijkstra16(int n, double h, const std::vector<Box>& boxes,
                                      double cx, double cy, double r) {
  const int side = n + 1;
  auto id = [side](int x, int y) { return x * side + y; };
  auto blocked = [&](double x, double y) {
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(x, y); });
  };
  std::vector<double> dist(static_cast<std::size_t>(side) * side, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int x = 0; x <= n; ++x) {
    for (int y = 0; y <= n; ++y) {
      if (blocked(x, y)) continue;
      double gap = std::hypot(x - cx, y - cy) - r;
      double d = gap <= 1e-9 ? 0.0 : (gap <= 1.0 + 1e-9 ? gap * h : kInf);
      if (d > 0.0 && d < kInf) {
        double len = std::hypot(x - cx, y - cy);
        double px = cx + r * (x - cx) / len, py = cy + r * (y - cy) / len;
        bool clear = std::none_of(boxes.begin(), boxes.end(), [&](const Box& b) {
          return segment_hits(b, x, y, px, py);
        });
        if (!clear) d = kInf;
      }
      if (d < kInf) {
        dist[id(x, y)] = d;
        pq.push({d, id(x, y)});
      }
    }
  }
  static const int moves[16][2] = {{1, 0},  {0, 1},  {-1, 0}, {0, -1}, {1, 1},   {1, -1},
                                   {-1, 1}, {-1, -1}, {1, 2},  {2, 1},  {-1, 2},  {-2, 1},
                                   {1, -2}, {2, -1},  {-1, -2}, {-2, -1}};
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    int ux = u / side, uy = u % side;
    for (const auto& m : moves) {
      int vx = ux + m[0], vy = uy + m[1];
      if (vx < 0 || vy < 0 || vx > n || vy > n || blocked(vx, vy)) continue;
      bool clear = std::none_of(boxes.begin(), boxes.end(), [&](const Box& b) {
        return segment_hits(b, ux, uy, vx, vy);
      });
      if (!clear) continue;
      double nd = d + h * std::hypot(m[0], m[1]);
      if (nd < dist[id(vx, vy)]) {
        dist[id(vx, vy)] = nd;
        pq.push({nd, id(vx, vy)});
      }
    }
  }
  return dist;
}

// min c.x subject to A x <= b by enumerating every vertex (all n-subsets of
// rows taken as equalities). The region must be bounded. nullopt if empty.
inline std::optional<double> vertex_lp(const std::vector<double>& c,
                                       const std::vector<std::vector<double>>& A,
                                       const std::vector<double>& b, double tol = 1e-9) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(A.size());
  std::optional<double> best;
  std::vector<int> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  if (m < n) return best;
  for (;;) {
    // Gaussian elimination with partial pivoting on the picked rows.
    std::vector<std::vector<double>> M(n, std::vector<double>(n + 1));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M[i][j] = A[pick[i]][j];
      M[i][n] = b[pick[i]];
    }
    bool singular = false;
    for (int col = 0; col < n && !singular; ++col) {
      int piv = col;
      for (int i = col + 1; i < n; ++i) {
        if (std::abs(M[i][col]) > std::abs(M[piv][col])) piv = i;
      }
      if (std::abs(M[piv][col]) < 1e-12) {
        singular = true;
        break;
      }
      std::swap(M[piv], M[col]);
      for (int i = 0; i < n; ++i) {
        if (i == col) continue;
        double f = M[i][col] / M[col][col];
        for (int j = col; j <= n; ++j) M[i][j] -= f * M[col][j];
      }
    }
    if (!singular) {
      std::vector<double> x(n);
      for (int i = 0; i < n; ++i) x[i] = M[i][n] / M[i][i];
      bool feasible = true;
      for (int r = 0; r < m && feasible; ++r) {
        double lhs = 0.0;
        for (int j = 0; j < n; ++j) lhs += A[r][j] * x[j];
        feasible = lhs <= b[r] + tol * std::max(1.0, std::abs(b[r]));
      }
      if (feasible) {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += c[j] * x[j];
        if (!best || v < *best) best = v;
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == m - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

// Exhaustive optimum of a small scheduling relaxation: every orientation of
// every vehicle pair (bit p of the mask set means the first vehicle of pair p
// goes first) times every active interval per vehicle. The callback solves
// the leaf LP and returns nullopt when it is infeasible.
inline double enumerate_schedules(
    const std::vector<int>& intervals_per_vehicle,
    const std::function<std::optional<double>(unsigned orientation,
                                              const std::vector<int>& interval)>& leaf) {
  const int n = static_cast<int>(intervals_per_vehicle.size());
  const unsigned pairs = static_cast<unsigned>(n * (n - 1) / 2);
  double best = kInf;
  for (unsigned mask = 0; mask < (1u << pairs); ++mask) {
    std::vector<int> pick(n, 0);
    for (;;) {
      if (auto v = leaf(mask, pick)) best = std::min(best, *v);
      int i = 0;
      while (i < n && ++pick[i] == intervals_per_vehicle[i]) pick[i++] = 0;
      if (i == n) break;
    }
  }
  return best;
}

// Brute-force maximum of f - secant and secant - f over samples of [a, b].
struct Envelope {
  double under = 0.0;
  double over = 0.0;
};

inline Envelope brute_envelope(const std::vector<double>& t, const std::vector<double>& f,
                               std::size_t a, std::size_t b) {
  Envelope e;
  for (std::size_t k = a; k <= b; ++k) {
    double s = f[a] + (f[b] - f[a]) * (t[k] - t[a]) / (t[b] - t[a]);
    e.under = std::max(e.under, f[k] - s);
    e.over = std::max(e.over, s - f[k]);
  }
  return e;
}

}  // namespace oracle

#endif  // VTOL_TESTS_ORACLES_HPP_
