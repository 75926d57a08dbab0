#include "fplap/operator.hpp"

#include <cmath>

#include "fplap/parallel.hpp"

namespace fplap {

namespace {

struct Kahan {
  double sum = 0, comp = 0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

void check_margin(const Grid& g, const Index& x, int near_cells) {
  for (int a = 0; a < g.n; ++a) {
    if (g.extent - std::abs(x[a]) < near_cells)
      throw quadrature_precondition(
          "NearBoundary: evaluation node within near_radius of the box edge");
  }
}

double pick_radius(const Grid& g, const QuadratureConfig& q, bool difference) {
  const double autor = difference ? auto_radius_difference(g) : auto_radius_plain(g);
  if (q.tail_radius <= 0) return autor;
  if (q.tail_radius + 1e-12 < autor)
    throw quadrature_precondition(
        "tail_radius smaller than the box circumradius bound for this evaluation");
  return q.tail_radius;
}

Index add(const Index& x, const Index& z, int n) {
  Index y = x;
  for (int a = 0; a < n; ++a) y[a] += z[a];
  return y;
}

Index sub(const Index& x, const Index& z, int n) {
  Index y = x;
  for (int a = 0; a < n; ++a) y[a] -= z[a];
  return y;
}

// One-sided lattice evaluation of the operator for a fetcher F(Index)->double.
template <typename Fetch>
EvalBreakdown eval_core(Fetch&& fetch, double ux, const Index& x, const KernelParams& k,
                        const OffsetTable& t, const std::vector<WeightedValue>& tail) {
  const SignedPower g(k.p);
  const int n = k.n;
  EvalBreakdown b;

  Kahan mid;
  for (const auto& e : t.mid) mid.add(e.w * g(ux - fetch(add(x, e.dz, n))));
  b.mid = mid.sum;

  double near = 0;
  for (const auto& e : t.near_pairs) {
    const double gp = g(ux - fetch(add(x, e.dz, n)));
    const double gm = g(ux - fetch(sub(x, e.dz, n)));
    near += e.w * (gp + gm);
  }
  b.near = near;

  double tl = 0;
  for (const auto& wv : tail) tl += wv.w * g(ux - wv.v);
  b.tail = tl;

  b.value = k.C * (b.near + b.mid + b.tail);
  return b;
}

struct DirectFetch {
  const GridFunction* u;
  double operator()(const Index& i) const { return u->at(i); }
};

struct ReflectedFetch {
  const GridFunction* u;
  const ReflectionFrame* f;
  double operator()(const Index& i) const { return u->at(f->reflect(i)); }
};

// cached window for field evaluation (direct view only)
struct Window {
  int n, half, width;
  std::vector<double> vals;
  double at(const Index& i) const {
    long f = 0;
    for (int a = 0; a < n; ++a) f = f * width + (i[a] + half);
    return vals[f];
  }
};

Window build_window(const GridFunction& u, int extra) {
  Window w;
  w.n = u.grid.n;
  w.half = u.grid.extent + extra;
  w.width = 2 * w.half + 1;
  long count = 1;
  for (int a = 0; a < w.n; ++a) count *= w.width;
  w.vals.resize(count);
  Index i{0, 0, 0};
  const int lo1 = (w.n >= 2) ? -w.half : 0, hi1 = (w.n >= 2) ? w.half : 0;
  const int lo2 = (w.n >= 3) ? -w.half : 0, hi2 = (w.n >= 3) ? w.half : 0;
  long f = 0;
  for (int a = -w.half; a <= w.half; ++a)
    for (int b = lo1; b <= hi1; ++b)
      for (int c = lo2; c <= hi2; ++c) {
        i = {a, b, c};
        // flat order must match Window::at: axis 0 slowest
        w.vals[f++] = u.at(i);
      }
  return w;
}

}  // namespace

std::vector<Index> interior_nodes(const Grid& g, int margin_cells) {
  std::vector<Index> out;
  const long total = g.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    bool ok = true;
    for (int a = 0; a < g.n; ++a)
      if (g.extent - std::abs(i[a]) < margin_cells) ok = false;
    if (ok) out.push_back(i);
  }
  return out;
}

EvalBreakdown frac_p_laplacian_detail(const GridFunction& u, const Index& x,
                                      const KernelParams& k, const QuadratureConfig& q) {
  q.validate();
  check_margin(u.grid, x, q.near_cells);
  const double R = pick_radius(u.grid, q, false);
  const OffsetTable& t = offset_table(k, u.grid.h, q.near_cells, R);
  if (t.tail_start + 1e-12 < circumradius(u.grid, u.grid.point(x)))
    throw quadrature_precondition("tail region does not clear the box from this node");
  const auto tail = tail_nodes(u.exterior, k, u.grid.point(x), t.tail_start);
  return eval_core(DirectFetch{&u}, u.at(x), x, k, t, tail);
}

double frac_p_laplacian(const GridFunction& u, const Index& x, const KernelParams& k,
                        const QuadratureConfig& q) {
  return frac_p_laplacian_detail(u, x, k, q).value;
}

std::vector<EvalBreakdown> evaluate_field(const GridFunction& u, const std::vector<Index>& xs,
                                          const KernelParams& k, const QuadratureConfig& q) {
  q.validate();
  const double R = pick_radius(u.grid, q, false);
  const OffsetTable& t = offset_table(k, u.grid.h, q.near_cells, R);
  for (const auto& x : xs) {
    check_margin(u.grid, x, q.near_cells);
    if (t.tail_start + 1e-12 < circumradius(u.grid, u.grid.point(x)))
      throw quadrature_precondition("tail region does not clear the box from this node");
  }
  const Window w = build_window(u, t.max_cells);
  std::vector<EvalBreakdown> out(xs.size());
  parallel_for(static_cast<long>(xs.size()), [&](long i) {
    const Index& x = xs[i];
    const auto tail = tail_nodes(u.exterior, k, u.grid.point(x), t.tail_start);
    out[i] = eval_core([&](const Index& j) { return w.at(j); }, w.at(x), x, k, t, tail);
  });
  return out;
}

double operator_difference_direct(const GridFunction& u, const ReflectionFrame& frame,
                                  const Index& x, const KernelParams& k,
                                  const QuadratureConfig& q) {
  q.validate();
  check_margin(u.grid, x, q.near_cells);
  const double R = pick_radius(u.grid, q, true);
  const OffsetTable& t = offset_table(k, u.grid.h, q.near_cells, R);
  const Point cx = u.grid.point(x);
  const Point cr = u.grid.point(frame.reflect(x));
  if (t.tail_start + 1e-12 < circumradius(u.grid, cx) ||
      t.tail_start + 1e-12 < circumradius(u.grid, cr))
    throw quadrature_precondition("difference tail region does not clear the box");

  const auto tail_u = tail_nodes(u.exterior, k, cx, t.tail_start);
  const auto tail_r = tail_nodes(u.exterior, k, cr, t.tail_start);
  const EvalBreakdown bu = eval_core(DirectFetch{&u}, u.at(x), x, k, t, tail_u);
  const EvalBreakdown br =
      eval_core(ReflectedFetch{&u, &frame}, u.at(frame.reflect(x)), x, k, t, tail_r);
  return br.value - bu.value;
}

DecompositionResult operator_difference_decomposed(const GridFunction& u,
                                                   const ReflectionFrame& frame, const Index& x,
                                                   const KernelParams& k,
                                                   const QuadratureConfig& q) {
  q.validate();
  check_margin(u.grid, x, q.near_cells);
  if (frame.side(x) != -1)
    throw quadrature_precondition("decomposed difference requires x strictly in Sigma_lambda");
  if (u.exterior.kind == Exterior::PowerDecay)
    throw quadrature_precondition(
        "decomposed difference supports Zero/Constant exteriors only");

  const double R = pick_radius(u.grid, q, true);
  const OffsetTable& t = offset_table(k, u.grid.h, q.near_cells, R);
  const Point cx = u.grid.point(x);
  const Point cr = u.grid.point(frame.reflect(x));
  if (t.tail_start + 1e-12 < circumradius(u.grid, cx) ||
      t.tail_start + 1e-12 < circumradius(u.grid, cr))
    throw quadrature_precondition("difference tail region does not clear the box");

  const SignedPower g(k.p);
  const int n = k.n;
  const double ux = u.at(x);
  const double ulx = u.at(frame.reflect(x));

  Kahan i1, i2;
  auto visit = [&](const Index& dz, double w) {
    const Index y = add(x, dz, n);
    const int side = frame.side(y);
    if (side < 0) {
      // Sigma side: K1 part of I1
      const double uy = u.at(y);
      const double uly = u.at(frame.reflect(y));
      i1.add(w * (g(ulx - uly) - g(ux - uy)));
    } else if (side == 0) {
      // plane nodes carry half weight in the folded integral
      const double uy = u.at(y);  // = u_lambda(y)
      i2.add(0.5 * w * (g(ulx - uy) - g(ux - uy) + g(ulx - uy) - g(ux - uy)));
    } else {
      // image side: this node is y_hat^lambda for y_hat in Sigma
      const Index yh = frame.reflect(y);
      const double uyh = u.at(yh);
      const double ulyh = u.at(y);  // u_lambda(y_hat) = u(y)
      const double b4 = g(ulx - ulyh) - g(ux - uyh) + g(ulx - uyh) - g(ux - ulyh);
      i2.add(w * b4);
      i1.add(-w * (g(ulx - ulyh) - g(ux - uyh)));
    }
  };

  for (const auto& e : t.mid) visit(e.dz, e.w);
  for (const auto& e : t.near_pairs) {
    visit(e.dz, e.w);
    Index neg{0, 0, 0};
    for (int a = 0; a < n; ++a) neg[a] = -e.dz[a];
    visit(neg, e.w);
  }

  // far field: u and u_lambda both equal the exterior value there
  const double a_ext = (u.exterior.kind == Exterior::Constant) ? u.exterior.amplitude : 0.0;
  const double dG = g(ulx - a_ext) - g(ux - a_ext);
  const double T = t.tail_const;
  const double delta = frame.plane_distance(x, u.grid.h);
  const double T2 = halfspace_tail_integral(k, t.tail_start, delta);
  i2.add(2.0 * dG * T2);
  i1.add(dG * (T - 2.0 * T2));

  DecompositionResult r;
  r.I1 = i1.sum;
  r.I2 = i2.sum;
  r.C_times_sum = k.C * (r.I1 + r.I2);

  const auto tail_u = tail_nodes(u.exterior, k, cx, t.tail_start);
  const auto tail_r = tail_nodes(u.exterior, k, cr, t.tail_start);
  const EvalBreakdown bu = eval_core(DirectFetch{&u}, ux, x, k, t, tail_u);
  const EvalBreakdown br = eval_core(ReflectedFetch{&u, &frame}, ulx, x, k, t, tail_r);
  r.direct = br.value - bu.value;
  return r;
}

}  // namespace fplap
