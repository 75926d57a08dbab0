#include "fplap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fplap/parallel.hpp"

namespace fplap {

void SolveConfig::validate() const {
  if (!(relaxation > 0.0 && relaxation <= 1.0))
    throw std::invalid_argument("SolveConfig: relaxation must lie in (0, 1]");
  if (!(tol_residual > 0.0)) throw std::invalid_argument("SolveConfig: tol_residual > 0 required");
  if (max_iters < 1 || max_outer < 1)
    throw std::invalid_argument("SolveConfig: iteration limits must be positive");
}

namespace {

// Unknowns are the nodes with |x| < 1 (strict); everything else is pinned to
// the Dirichlet value 0, which lets all fixed-zero contributions collapse
// into one aggregated weight per unknown.
struct BallSystem {
  Grid grid;
  KernelParams k;
  const OffsetTable* table = nullptr;
  SignedPower g;
  std::vector<Index> idx;
  std::vector<double> w0;  // aggregated fixed-zero weight + analytic tail
  double diag_total = 0;   // total kernel mass incl. tail (p = 2 shortcut)

  BallSystem(const Grid& grid_, const KernelParams& k_, const QuadratureConfig& q)
      : grid(grid_), k(k_), g(k_.p) {
    if (grid.half_width() < 1.0 + 4.0 * grid.h - 1e-12)
      throw std::invalid_argument("ball solver: box must contain B_1 with margin >= 4h");
    const double R = q.tail_radius > 0 ? q.tail_radius : auto_radius_plain(grid);
    table = &offset_table(k, grid.h, q.near_cells, R);
    const long total = grid.node_count();
    for (long f = 0; f < total; ++f) {
      const Index i = grid.unflat(f);
      if (grid.radius2(i) < 1.0) idx.push_back(i);
    }
    diag_total = table->sum_all + table->tail_const;
    w0.assign(idx.size(), 0.0);
    parallel_for(static_cast<long>(idx.size()), [&](long a) {
      double used = 0;
      for (size_t b = 0; b < idx.size(); ++b) {
        if (b == static_cast<size_t>(a)) continue;
        Index dz{0, 0, 0};
        for (int d = 0; d < grid.n; ++d) dz[d] = idx[b][d] - idx[a][d];
        used += table->dense_at(dz);
      }
      w0[a] = (table->sum_all - used) + table->tail_const;
    });
  }

  size_t size() const { return idx.size(); }

  // C * [ sum_y W(x-y) G(t - u_y) + w0 G(t) ]
  double phi(long a, double t, const std::vector<double>& u) const {
    const int n = grid.n;
    const Index& xa = idx[a];
    double acc = 0;
    for (size_t b = 0; b < idx.size(); ++b) {
      Index dz{0, 0, 0};
      for (int d = 0; d < n; ++d) dz[d] = xa[d] - idx[b][d];
      acc += table->dense_at(dz) * g(t - u[b]);
    }
    return k.C * (acc + w0[a] * g(t));
  }

  // p = 2 shortcut: returns sum_y W(x-y) u_y
  double linear_rhs(long a, const std::vector<double>& u) const {
    const int n = grid.n;
    const Index& xa = idx[a];
    double acc = 0;
    for (size_t b = 0; b < idx.size(); ++b) {
      Index dz{0, 0, 0};
      for (int d = 0; d < n; ++d) dz[d] = xa[d] - idx[b][d];
      acc += table->dense_at(dz) * u[b];
    }
    return acc;
  }
};

// bracketed regula falsi (Illinois); phi must be increasing
template <typename Phi>
double solve_increasing(Phi&& phi, double t0, double f0, double step0, double phi_tol) {
  if (std::fabs(f0) <= phi_tol) return t0;
  double lo = t0, hi = t0, flo = f0, fhi = f0;
  double step = step0;
  if (f0 < 0) {
    for (int i = 0; i < 200 && fhi < 0; ++i) {
      lo = hi;
      flo = fhi;
      hi += step;
      step *= 2;
      fhi = phi(hi);
    }
    if (fhi < 0) throw std::runtime_error("scalar solve: failed to bracket root (hi)");
  } else {
    for (int i = 0; i < 200 && flo > 0; ++i) {
      hi = lo;
      fhi = flo;
      lo -= step;
      step *= 2;
      flo = phi(lo);
    }
    if (flo > 0) throw std::runtime_error("scalar solve: failed to bracket root (lo)");
  }
  if (flo == 0) return lo;
  if (fhi == 0) return hi;

  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double c = (lo * fhi - hi * flo) / (fhi - flo);
    if (!std::isfinite(c) || c <= lo || c >= hi) c = 0.5 * (lo + hi);
    const double fc = phi(c);
    if (std::fabs(fc) <= phi_tol || hi - lo <= 1e-15 * (1.0 + std::fabs(lo) + std::fabs(hi)))
      return c;
    if (fc > 0) {
      hi = c;
      fhi = fc;
      if (side == +1) flo *= 0.5;
      side = +1;
    } else {
      lo = c;
      flo = fc;
      if (side == -1) fhi *= 0.5;
      side = -1;
    }
  }
  return 0.5 * (lo + hi);
}

// One damped Jacobi sweep; returns max |residual| of the incoming iterate.
double sweep(const BallSystem& sys, std::vector<double>& u, const std::vector<double>& f,
             double omega, double phi_tol, bool positive) {
  const size_t m = sys.size();
  std::vector<double> tstar(m), res(m);
  const bool linear = sys.k.p == 2.0;
  parallel_for(static_cast<long>(m), [&](long a) {
    if (linear) {
      const double b = sys.linear_rhs(a, u);
      res[a] = sys.k.C * (sys.diag_total * u[a] - b) - f[a];
      tstar[a] = (f[a] / sys.k.C + b) / sys.diag_total;
    } else {
      const double cur = sys.phi(a, u[a], u) - f[a];
      res[a] = cur;
      if (std::fabs(cur) <= phi_tol) {
        tstar[a] = u[a];
      } else {
        tstar[a] = solve_increasing([&](double t) { return sys.phi(a, t, u) - f[a]; }, u[a], cur,
                                    0.25 * (std::fabs(u[a]) + 1e-3), phi_tol);
      }
      if (positive && tstar[a] < 0.0) tstar[a] = 0.0;  // root is >= 0; clip solver slack
    }
  });
  double rmax = 0;
  for (size_t a = 0; a < m; ++a) {
    u[a] += omega * (tstar[a] - u[a]);
    rmax = std::fmax(rmax, std::fabs(res[a]));
    if (positive && !(u[a] > 0.0))
      throw non_positive_iterate("NonPositiveIterate: interior iterate lost positivity");
  }
  return rmax;
}

struct InnerResult {
  double residual = 0;
  long sweeps = 0;
  bool converged = false;
};

InnerResult run_inner(const BallSystem& sys, std::vector<double>& u, const std::vector<double>& f,
                      double omega, double tol_abs, long max_sweeps, bool positive) {
  InnerResult r;
  for (long it = 0; it < max_sweeps; ++it) {
    const double res = sweep(sys, u, f, omega, 0.2 * tol_abs, positive);
    r.residual = res;
    r.sweeps = it + 1;
    if (res <= tol_abs) {
      r.converged = true;
      return r;
    }
  }
  double rmax = 0;
  for (size_t a = 0; a < sys.size(); ++a)
    rmax = std::fmax(rmax, std::fabs(sys.phi(a, u[a], u) - f[a]));
  r.residual = rmax;
  r.converged = rmax <= tol_abs;
  return r;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::fmax(m, std::fabs(x));
  return m;
}

GridFunction assemble_ball(const BallSystem& sys, const std::vector<double>& u) {
  GridFunction out(sys.grid, ExteriorRule::zero());
  for (size_t a = 0; a < sys.size(); ++a) out.values[sys.grid.flat(sys.idx[a])] = u[a];
  return out;
}

}  // namespace

Solution solve_dirichlet_rhs(const GridFunction& f, const KernelParams& k,
                             const QuadratureConfig& q, const SolveConfig& cfg) {
  cfg.validate();
  q.validate();
  BallSystem sys(f.grid, k, q);
  std::vector<double> u(sys.size(), 0.0), fv(sys.size());
  for (size_t a = 0; a < sys.size(); ++a) fv[a] = f.values[f.grid.flat(sys.idx[a])];
  const double scale = max_abs(fv) + 1e-14;
  const double tol_abs = cfg.tol_residual * scale;
  Solution sol;
  bool ok = false;
  long used = 0;
  for (long it = 0; it < cfg.max_iters && !ok; ++it) {
    const double res = sweep(sys, u, fv, cfg.relaxation, 0.2 * tol_abs, false);
    used = it + 1;
    sol.residual_history.push_back(res / scale);
    if (res <= tol_abs) ok = true;
  }
  if (!ok) {
    double rmax = 0;
    for (size_t a = 0; a < sys.size(); ++a)
      rmax = std::fmax(rmax, std::fabs(sys.phi(a, u[a], u) - fv[a]));
    ok = rmax <= tol_abs;
  }
  sol.u = assemble_ball(sys, u);
  sol.iterations = used;
  sol.converged = ok;
  sol.mu = 1.0;
  return sol;
}

Solution solve_ball_power(const Grid& grid, double q_exp, const KernelParams& k,
                          const QuadratureConfig& q, const SolveConfig& cfg) {
  cfg.validate();
  q.validate();
  if (q_exp < k.p - 1.0)
    std::fprintf(stderr, "solve_ball_power: warning: q = %g < p-1 = %g\n", q_exp, k.p - 1.0);
  BallSystem sys(grid, k, q);
  const double N = cfg.normalization;
  double omega = cfg.relaxation;

  auto init_profile = [&](std::vector<double>& out) {
    out.resize(sys.size());
    for (size_t a = 0; a < sys.size(); ++a)
      out[a] = N * std::pow(1.0 - grid.radius2(sys.idx[a]), k.s);
  };

  // normalized iterate; one damped Jacobi sweep of
  //   solve_x[ phi(t) = mu * v^q ] then renormalize to max = N per sweep
  Solution sol;
  std::vector<double> v, w(sys.size()), f(sys.size());
  init_profile(v);
  double mu = 1.0, diff = N;
  long sweeps = 0;
  int restarts = 0;
  bool converged = false;
  const bool linear = k.p == 2.0;
  const long block = 20;

  while (sweeps < cfg.max_iters) {
    double fscale = 1e-14;
    for (size_t a = 0; a < sys.size(); ++a) {
      f[a] = mu * std::pow(v[a], q_exp);
      fscale = std::fmax(fscale, f[a]);
    }
    const double phi_tol =
        0.2 * std::fmax(cfg.tol_residual, std::fmin(1e-2, 0.05 * diff / N)) * fscale;
    bool positive = true;
    parallel_for(static_cast<long>(sys.size()), [&](long a) {
      if (linear) {
        const double b = sys.linear_rhs(a, v);
        w[a] = (f[a] / sys.k.C + b) / sys.diag_total;
      } else {
        const double cur = sys.phi(a, v[a], v) - f[a];
        if (std::fabs(cur) <= phi_tol) {
          w[a] = v[a];
        } else {
          w[a] = solve_increasing([&](double t) { return sys.phi(a, t, v) - f[a]; }, v[a], cur,
                                  0.25 * (std::fabs(v[a]) + 1e-3), phi_tol);
        }
        if (w[a] < 0.0) w[a] = 0.0;  // root is >= 0; clip solver slack
      }
    });
    double m = 0;
    for (size_t a = 0; a < sys.size(); ++a) {
      w[a] = v[a] + omega * (w[a] - v[a]);
      m = std::fmax(m, w[a]);
      if (!(w[a] > 0.0)) positive = false;
    }
    ++sweeps;
    if (!positive || !(m > 0) || !std::isfinite(m)) {
      if (++restarts > 2)
        throw non_positive_iterate("NonPositiveIterate: interior iterate lost positivity");
      omega *= 0.5;
      init_profile(v);
      diff = N;
      mu = 1.0;
      continue;
    }
    diff = 0;
    for (size_t a = 0; a < sys.size(); ++a) {
      const double vn = w[a] * (N / m);
      diff = std::fmax(diff, std::fabs(vn - v[a]));
      v[a] = vn;
    }
    mu *= std::pow(N / m, k.p - 1.0);

    if (sweeps % block == 0) {
      sol.residual_history.push_back(diff / N);
      if (diff <= 0.25 * cfg.tol_residual * N) {
        double rnl = 0, rhs_scale = 1e-14;
        for (size_t a = 0; a < sys.size(); ++a)
          rhs_scale = std::fmax(rhs_scale, mu * std::pow(v[a], q_exp));
        for (size_t a = 0; a < sys.size(); ++a)
          rnl = std::fmax(rnl, std::fabs(sys.phi(a, v[a], v) - mu * std::pow(v[a], q_exp)));
        sol.residual_history.push_back(rnl / rhs_scale);
        if (rnl <= cfg.tol_residual * rhs_scale) {
          converged = true;
          break;
        }
      }
    }
  }

  sol.u = assemble_ball(sys, v);
  sol.iterations = sweeps;
  sol.converged = converged;
  sol.mu = mu;
  return sol;
}

WholeSpaceNonlinearity WholeSpaceNonlinearity::zero() {
  WholeSpaceNonlinearity g;
  g.kind = Kind::Zero;
  return g;
}

WholeSpaceNonlinearity WholeSpaceNonlinearity::power_minus_linear(double q_exp, double a) {
  if (!(a > 0.0))
    throw std::invalid_argument("power_minus_linear: need a > 0 so that g'(0) = -a <= 0");
  if (!(q_exp > 1.0)) throw std::invalid_argument("power_minus_linear: need q > 1");
  WholeSpaceNonlinearity g;
  g.kind = Kind::PowerMinusLinear;
  g.q_exp = q_exp;
  g.a = a;
  return g;
}

WholeSpaceNonlinearity WholeSpaceNonlinearity::custom(std::function<double(double)> g,
                                                      std::function<double(double)> gp) {
  WholeSpaceNonlinearity out;
  out.kind = Kind::Custom;
  out.g = std::move(g);
  out.g_prime = std::move(gp);
  return out;
}

DecayFit fit_power_decay(const GridFunction& v, const std::vector<Index>& shell) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long m = 0;
  for (const auto& i : shell) {
    const double val = v.at(i);
    const double r2 = v.grid.radius2(i);
    if (!(val > 0) || !(r2 > 0)) continue;
    const double lx = 0.5 * std::log(r2), ly = std::log(val);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  DecayFit fit;
  if (m < 4) {
    fit.max_rel_misfit = 1.0;
    return fit;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  fit.alpha = -slope;
  fit.A = std::exp((sy - slope * sx) / m);
  for (const auto& i : shell) {
    const double val = v.at(i);
    if (!(val > 0)) continue;
    const double pred = fit.A * std::pow(v.grid.radius2(i), -0.5 * fit.alpha);
    fit.max_rel_misfit = std::fmax(fit.max_rel_misfit, std::fabs(pred - val) / val);
  }
  return fit;
}

namespace {

struct WsWindow {
  int n = 1, half = 0;
  long width = 0;
  std::vector<double> vals;
  long flat(const Index& i) const {
    long f = 0;
    for (int a = 0; a < n; ++a) f = f * width + (i[a] + half);
    return f;
  }
};

struct WsSystem {
  Grid grid;
  KernelParams k;
  const OffsetTable* table = nullptr;
  SignedPower g;
  std::vector<Index> unk;        // margin-interior nodes
  std::vector<long> unk_flat;
  std::vector<size_t> certified;  // unknowns deep enough for the real operator
  std::vector<double> tail_avg;  // kernel-averaged unit-amplitude exterior beyond the tail
  WsWindow win;

  WsSystem(const Grid& grid_, const KernelParams& k_, const QuadratureConfig& q)
      : grid(grid_), k(k_), g(k_.p) {
    const double R = q.tail_radius > 0 ? q.tail_radius : auto_radius_plain(grid);
    table = &offset_table(k, grid.h, q.near_cells, R);
    const long total = grid.node_count();
    for (long f = 0; f < total; ++f) {
      const Index i = grid.unflat(f);
      unk.push_back(i);
      unk_flat.push_back(f);
      bool interior = true;
      for (int a = 0; a < grid.n; ++a)
        if (grid.extent - std::abs(i[a]) < q.near_cells) interior = false;
      if (interior) certified.push_back(unk.size() - 1);
    }
    win.n = grid.n;
    win.half = grid.extent + table->max_cells;
    win.width = 2L * win.half + 1;
    long count = 1;
    for (int a = 0; a < grid.n; ++a) count *= win.width;
    win.vals.assign(count, 0.0);
  }

  void refresh_window(const GridFunction& vf) {
    const int n = grid.n;
    const int lo1 = (n >= 2) ? -win.half : 0, hi1 = (n >= 2) ? win.half : 0;
    const int lo2 = (n >= 3) ? -win.half : 0, hi2 = (n >= 3) ? win.half : 0;
    long f = 0;
    for (int a = -win.half; a <= win.half; ++a)
      for (int b = lo1; b <= hi1; ++b)
        for (int c = lo2; c <= hi2; ++c) win.vals[f++] = vf.at({a, b, c});
  }

  void refresh_unknowns(const std::vector<double>& vals) {
    for (size_t a = 0; a < unk.size(); ++a) win.vals[win.flat(unk[a])] = vals[a];
  }

  void compute_tail_avgs(double alpha) {
    tail_avg.assign(unk.size(), 0.0);
    const ExteriorRule unitrule = ExteriorRule::power_decay(1.0, alpha);
    parallel_for(static_cast<long>(unk.size()), [&](long a) {
      const auto nodes = tail_nodes(unitrule, k, grid.point(unk[a]), table->tail_start);
      double acc = 0;
      for (const auto& wv : nodes) acc += wv.w * wv.v;
      tail_avg[a] = acc / table->tail_const;
    });
  }

  // C * [ lattice sum + T * G(t - A * tail_avg) ]
  double phi(long a, double t, double A) const {
    const int n = grid.n;
    const Index& x = unk[a];
    double acc = 0;
    for (const auto& e : table->mid) {
      Index y = x;
      for (int d = 0; d < n; ++d) y[d] += e.dz[d];
      acc += e.w * g(t - win.vals[win.flat(y)]);
    }
    for (const auto& e : table->near_pairs) {
      Index yp = x, ym = x;
      for (int d = 0; d < n; ++d) {
        yp[d] += e.dz[d];
        ym[d] -= e.dz[d];
      }
      acc += e.w * (g(t - win.vals[win.flat(yp)]) + g(t - win.vals[win.flat(ym)]));
    }
    acc += table->tail_const * g(t - A * tail_avg[a]);
    return k.C * acc;
  }
};

std::vector<Index> shell_nodes(const Grid& g, double inner_frac, double outer_frac = 1.0) {
  std::vector<Index> out;
  const double L = g.half_width();
  const long total = g.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    const double r = std::sqrt(g.radius2(i));
    if (r >= inner_frac * L && r <= outer_frac * L + 1e-12) out.push_back(i);
  }
  return out;
}

}  // namespace

Solution solve_whole_space(const WholeSpaceNonlinearity& gspec, const KernelParams& k,
                           const QuadratureConfig& q, const SolveConfig& cfg, double box_L,
                           double h, const Point& init_center) {
  cfg.validate();
  q.validate();
  const int extent = static_cast<int>(std::lround(box_L / h));
  Grid grid(k.n, h, extent);
  const double alpha0 = k.n + k.sp();

  if (gspec.kind == WholeSpaceNonlinearity::Kind::Zero) {
    Solution sol;
    sol.u = GridFunction(grid, ExteriorRule::power_decay(0.0, alpha0));
    sol.converged = true;
    return sol;
  }

  WsSystem sys(grid, k, q);
  const size_t m = sys.unk.size();
  const bool custom = gspec.kind == WholeSpaceNonlinearity::Kind::Custom;
  const double qe = gspec.q_exp;

  // normalized shape iterate (max v = 1); u = c * v
  std::vector<double> v(m);
  {
    const double w0 = 0.75;
    const double beta = std::fmax(1.0, 0.5 * alpha0);
    for (size_t a = 0; a < m; ++a) {
      const Point x = grid.point(sys.unk[a]);
      double r2 = 0;
      for (int d = 0; d < k.n; ++d) {
        const double dd = x[d] - init_center[d];
        r2 += dd * dd;
      }
      v[a] = std::pow(1.0 + r2 / (w0 * w0), -beta);
    }
  }

  GridFunction vf(grid, ExteriorRule::power_decay(1e-4, alpha0));
  double c = custom ? 1.0 : 0.5;
  const double omega = cfg.relaxation;
  const double theta = custom ? 0.0 : 0.7 / std::fmax(qe - (k.p - 1.0), 0.5);
  long sweeps = 0;
  bool converged = false;
  Solution sol;

  auto rebuild = [&]() {
    for (size_t a = 0; a < m; ++a) vf.values[sys.unk_flat[a]] = v[a];
    // fit away from the bump, damp the update, clamp the exponent
    const DecayFit fit = fit_power_decay(vf, shell_nodes(grid, 0.55, 1.0));
    if (fit.A > 0 && fit.alpha > 0.0) {
      const double alpha_new = std::clamp(fit.alpha, 0.3, alpha0 + 2.0);
      const double al = 0.5 * vf.exterior.alpha + 0.5 * alpha_new;
      const double lg = vf.exterior.amplitude > 0
                            ? 0.5 * std::log(vf.exterior.amplitude) + 0.5 * std::log(fit.A)
                            : std::log(fit.A);
      vf.exterior = ExteriorRule::power_decay(std::exp(lg), al);
    }
    sys.refresh_window(vf);
    sys.compute_tail_avgs(vf.exterior.alpha);
  };
  rebuild();
  sys.refresh_unknowns(v);

  auto assemble_u = [&]() {
    for (size_t a = 0; a < m; ++a) vf.values[sys.unk_flat[a]] = v[a];
    GridFunction u(grid, ExteriorRule::power_decay(c * vf.exterior.amplitude, vf.exterior.alpha));
    for (long f = 0; f < grid.node_count(); ++f) u.values[f] = c * vf.values[f];
    return u;
  };

  // one damped Jacobi sweep of the rescaled equation per iteration; the
  // nonlinearity, normalization, and amplitude all refresh every sweep
  const long block = 25;
  double diff_block = 1.0, diff = 1.0, mlast = 1.0;
  std::vector<double> tstar(m), w(m);
  while (sweeps < cfg.max_iters) {
    const double mu1 = custom ? 1.0 : std::pow(c, qe - (k.p - 1.0));
    const double lin = custom ? 1.0 : gspec.a * std::pow(c, 2.0 - k.p);
    double fscale = 1e-14;
    for (size_t a = 0; a < m; ++a) {
      const double r = custom ? gspec.g(v[a]) + lin * v[a] : mu1 * std::pow(v[a], qe);
      w[a] = r;  // reuse as rhs storage
      fscale = std::fmax(fscale, std::fabs(r));
    }
    const double tol_abs =
        std::fmax(cfg.tol_residual, std::fmin(1e-2, 0.05 * diff_block)) * fscale;
    const double Av = vf.exterior.amplitude;
    const bool linear_g = (k.p == 2.0);
    parallel_for(static_cast<long>(m), [&](long a) {
      const double rhs = w[a];
      const double cur = sys.phi(a, v[a], Av) + lin * v[a] - rhs;
      if (linear_g) {
        const double slope = k.C * (sys.table->sum_all + sys.table->tail_const) + lin;
        tstar[a] = v[a] - cur / slope;
      } else if (std::fabs(cur) <= 0.2 * tol_abs) {
        tstar[a] = v[a];
      } else {
        tstar[a] = solve_increasing(
            [&](double t) { return sys.phi(a, t, Av) + lin * t - rhs; }, v[a], cur,
            0.25 * (std::fabs(v[a]) + 1e-3), 0.2 * tol_abs);
      }
    });
    double mnew = 0;
    for (size_t a = 0; a < m; ++a) {
      w[a] = v[a] + omega * (tstar[a] - v[a]);
      mnew = std::fmax(mnew, w[a]);
    }
    if (!(mnew > 0) || !std::isfinite(mnew))
      throw non_positive_iterate("NonPositiveIterate: whole-space iterate collapsed");
    diff = 0;
    for (size_t a = 0; a < m; ++a) {
      const double vn = custom ? w[a] : w[a] / mnew;
      diff = std::fmax(diff, std::fabs(vn - v[a]));
      v[a] = vn;
    }
    if (!custom) c *= std::pow(mnew, -theta);
    mlast = mnew;
    sys.refresh_unknowns(v);
    ++sweeps;

    if (sweeps % block == 0) {
      rebuild();
      sys.refresh_unknowns(v);
      diff_block = diff;
      sol.residual_history.push_back(diff);
      const bool scale_ok = custom || std::fabs(mlast - 1.0) <= 100.0 * cfg.tol_residual;
      if (diff <= 0.5 * cfg.tol_residual && scale_ok) {
        GridFunction u = assemble_u();
        double rnl = 0, gscale = 1e-14;
        std::vector<Index> cert_idx;
        std::vector<double> gv;
        for (size_t ci : sys.certified) {
          const double uu = u.values[sys.unk_flat[ci]];
          gv.push_back(custom ? gspec.g(uu) : std::pow(uu, qe) - gspec.a * uu);
          gscale = std::fmax(gscale, std::fabs(gv.back()));
          cert_idx.push_back(sys.unk[ci]);
        }
        const auto vals = evaluate_field(u, cert_idx, k, q);
        for (size_t a = 0; a < cert_idx.size(); ++a)
          rnl = std::fmax(rnl, std::fabs(vals[a].value - gv[a]));
        sol.residual_history.push_back(rnl / gscale);
        if (rnl <= cfg.tol_residual * gscale) {
          converged = true;
          break;
        }
      }
    }
  }

  GridFunction u = assemble_u();
  const DecayFit fit = fit_power_decay(u, shell_nodes(grid, 0.55, 1.0));
  if (converged && fit.max_rel_misfit > 0.05)
    throw decay_fit_failed("DecayFitFailed: outer shell deviates from the fitted power tail by " +
                           std::to_string(fit.max_rel_misfit));

  sol.u = u;
  sol.iterations = sweeps;
  sol.converged = converged;
  sol.mu = 1.0;
  return sol;
}

}  // namespace fplap
