#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fplap {

struct misaligned_plane : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct empty_region : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Index = std::array<int, 3>;   // trailing components are 0 for n < 3
using Point = std::array<double, 3>;

// Uniform node-centered lattice over the cube [-extent*h, extent*h]^n.
// Node coordinates are exactly i*h; nothing is cell-centered, so reflections
// about half-lattice planes map nodes onto nodes.
struct Grid {
  int n = 1;
  double h = 1.0 / 64.0;
  int extent = 64;

  Grid() = default;
  Grid(int n_, double h_, int extent_);

  int width() const { return 2 * extent + 1; }
  long node_count() const;
  double half_width() const { return extent * h; }  // L

  bool inside(const Index& i) const {
    for (int a = 0; a < n; ++a)
      if (i[a] < -extent || i[a] > extent) return false;
    return true;
  }

  long flat(const Index& i) const {
    long f = 0;
    for (int a = 0; a < n; ++a) f = f * width() + (i[a] + extent);
    return f;
  }

  Index unflat(long f) const {
    Index i{0, 0, 0};
    for (int a = n - 1; a >= 0; --a) {
      i[a] = static_cast<int>(f % width()) - extent;
      f /= width();
    }
    return i;
  }

  Point point(const Index& i) const {
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < n; ++a) x[a] = i[a] * h;
    return x;
  }

  double radius2(const Index& i) const {
    double r2 = 0;
    for (int a = 0; a < n; ++a) r2 += (i[a] * h) * (i[a] * h);
    return r2;
  }

  // squared index distance (exact integer)
  static long index_dist2(const Index& a, const Index& b, int n) {
    long d2 = 0;
    for (int k = 0; k < n; ++k) {
      long d = a[k] - b[k];
      d2 += d * d;
    }
    return d2;
  }
};

// Grid for the unit-ball problem: contains B_1(0) with margin >= 4h.
Grid make_ball_grid(int n, double h, int margin_cells = 4);

enum class Exterior { Zero, Constant, PowerDecay };

// Analytic extension of a grid function outside its box. PowerDecay means
// u(y) ~ A |y|^{-alpha}; alpha > 0 keeps u in L_sp.
struct ExteriorRule {
  Exterior kind = Exterior::Zero;
  double amplitude = 0.0;
  double alpha = 0.0;

  static ExteriorRule zero() { return {}; }
  static ExteriorRule constant(double a) { return {Exterior::Constant, a, 0.0}; }
  static ExteriorRule power_decay(double A, double alpha);

  double value(const Point& y, int n) const {
    switch (kind) {
      case Exterior::Zero: return 0.0;
      case Exterior::Constant: return amplitude;
      default: {
        double r2 = 0;
        for (int a = 0; a < n; ++a) r2 += y[a] * y[a];
        return amplitude * std::pow(r2, -0.5 * alpha);
      }
    }
  }
};

// Values of u on the lattice plus the exterior extension. Immutable once
// built as far as the operators are concerned; construction is the only
// mutating phase.
struct GridFunction {
  Grid grid;
  std::vector<double> values;
  ExteriorRule exterior;

  GridFunction() = default;
  GridFunction(const Grid& g, ExteriorRule rule = ExteriorRule::zero())
      : grid(g), values(g.node_count(), 0.0), exterior(rule) {}

  double at(const Index& i) const {
    if (grid.inside(i)) return values[grid.flat(i)];
    return exterior.value(grid.point(i), grid.n);
  }

  double& operator[](long f) { return values[f]; }
  double operator[](long f) const { return values[f]; }

  double max_value() const;
  double max_abs() const;
  void validate_finite() const;
};

// Reflection about the plane x.d = lambda with d = sign * e_axis and
// lambda = m_half * h/2. Integer index arithmetic keeps the involution and
// all side tests exact.
struct ReflectionFrame {
  int axis = 0;
  int sign = +1;
  long m_half = 0;
  double lambda = 0.0;

  static ReflectionFrame aligned(int axis, int sign, double lambda, const Grid& g);
  static ReflectionFrame from_half_steps(int axis, int sign, long m_half, const Grid& g);

  Index reflect(const Index& i) const {
    Index r = i;
    r[axis] = static_cast<int>(sign * m_half - i[axis]);
    return r;
  }

  // -1: x in Sigma_lambda (x.d < lambda), 0: on plane, +1: image side
  int side(const Index& i) const {
    const long c = 2L * sign * i[axis];
    return c < m_half ? -1 : (c == m_half ? 0 : +1);
  }

  // |lambda - x.d|
  double plane_distance(const Index& i, double h) const {
    return std::fabs(static_cast<double>(m_half - 2L * sign * i[axis])) * (h * 0.5);
  }
};

// w_lambda(x) = u(x^lambda) - u(x) on every box node (anti-symmetric by
// construction; meaningful on Sigma_lambda).
GridFunction w_lambda(const GridFunction& u, const ReflectionFrame& frame);

struct MinResult {
  double value;
  Index node;
};

// Minimum and its witness over the nodes where region(i) is true; ties broken
// by the lexicographically smallest index.
template <typename Pred>
MinResult min_on_region(const GridFunction& w, Pred&& region) {
  const long total = w.grid.node_count();
  bool found = false;
  MinResult best{0.0, {0, 0, 0}};
  for (long f = 0; f < total; ++f) {
    const Index i = w.grid.unflat(f);
    if (!region(i)) continue;
    const double v = w.values[f];
    if (!found || v < best.value) {
      best = {v, i};
      found = true;
    }
  }
  if (!found) throw empty_region("min_on_region: empty region");
  return best;
}

}  // namespace fplap
