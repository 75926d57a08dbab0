#include "fplap/grid.hpp"

#include <cmath>

namespace fplap {

Grid::Grid(int n_, double h_, int extent_) : n(n_), h(h_), extent(extent_) {
  if (n < 1 || n > 3) throw std::invalid_argument("Grid: n must be 1, 2 or 3");
  if (!(h > 0.0)) throw std::invalid_argument("Grid: need h > 0");
  if (extent < 1) throw std::invalid_argument("Grid: need extent >= 1");
}

long Grid::node_count() const {
  long c = 1;
  for (int a = 0; a < n; ++a) c *= width();
  return c;
}

Grid make_ball_grid(int n, double h, int margin_cells) {
  const int e = static_cast<int>(std::ceil(1.0 / h)) + margin_cells;
  return Grid(n, h, e);
}

ExteriorRule ExteriorRule::power_decay(double A, double alpha) {
  if (!(A >= 0.0)) throw std::invalid_argument("ExteriorRule: need A >= 0");
  if (!(alpha > 0.0))
    throw std::invalid_argument("ExteriorRule: PowerDecay needs alpha > 0 for decay at infinity");
  return {Exterior::PowerDecay, A, alpha};
}

double GridFunction::max_value() const {
  double m = values.empty() ? 0.0 : values[0];
  for (double v : values) m = std::fmax(m, v);
  return m;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::fmax(m, std::fabs(v));
  return m;
}

void GridFunction::validate_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite node value");
}

ReflectionFrame ReflectionFrame::from_half_steps(int axis, int sign, long m_half, const Grid& g) {
  if (axis < 0 || axis >= g.n) throw std::invalid_argument("ReflectionFrame: bad axis");
  if (sign != 1 && sign != -1) throw std::invalid_argument("ReflectionFrame: sign must be +-1");
  ReflectionFrame f;
  f.axis = axis;
  f.sign = sign;
  f.m_half = m_half;
  f.lambda = static_cast<double>(m_half) * (g.h * 0.5);
  return f;
}

ReflectionFrame ReflectionFrame::aligned(int axis, int sign, double lambda, const Grid& g) {
  const double steps = lambda / (g.h * 0.5);
  const double rounded = std::round(steps);
  if (std::fabs(steps - rounded) > 1e-9) {
    throw misaligned_plane("MisalignedPlane: lambda must be a multiple of h/2");
  }
  return from_half_steps(axis, sign, static_cast<long>(rounded), g);
}

GridFunction w_lambda(const GridFunction& u, const ReflectionFrame& frame) {
  GridFunction w(u.grid, ExteriorRule::zero());
  const long total = u.grid.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = u.grid.unflat(f);
    w.values[f] = u.at(frame.reflect(i)) - u.values[f];
  }
  return w;
}

}  // namespace fplap
