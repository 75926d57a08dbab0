#include "fplap/principles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "fplap/io.hpp"
#include "fplap/parallel.hpp"
#include "fplap/rng.hpp"

namespace fplap {

namespace {

bool margin_ok(const Grid& g, const Index& i, int cells) {
  for (int a = 0; a < g.n; ++a)
    if (g.extent - std::abs(i[a]) < cells) return false;
  return true;
}

void require_nonneg_exterior(const GridFunction& u) {
  if (u.exterior.kind == Exterior::Constant && u.exterior.amplitude < 0)
    throw hypothesis_violated("HypothesisViolated: exterior value negative");
}

}  // namespace

TrialOutcome check_simple_mp(const GridFunction& u, const RegionPred& omega,
                             const KernelParams& k, const QuadratureConfig& q) {
  require_nonneg_exterior(u);
  const Grid& g = u.grid;
  const long total = g.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    if (!omega(i) && u.values[f] < 0.0)
      throw hypothesis_violated("HypothesisViolated: u < 0 outside omega");
  }
  const auto pred = [&](const Index& i) { return omega(i) && margin_ok(g, i, q.near_cells); };
  const MinResult mn = min_on_region(u, pred);
  TrialOutcome out;
  if (mn.value >= 0.0) {
    out.vacuous = true;
    return out;
  }
  out.node = mn.node;
  out.value = frac_p_laplacian(u, mn.node, k, q);
  return out;
}

TrialOutcome check_antisymmetric_mp(const GridFunction& u, const ReflectionFrame& frame,
                                    const RegionPred& omega, const KernelParams& k,
                                    const QuadratureConfig& q) {
  require_nonneg_exterior(u);
  const Grid& g = u.grid;
  const GridFunction w = w_lambda(u, frame);
  const long total = g.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    if (frame.side(i) == -1 && !omega(i) && w.values[f] < 0.0)
      throw hypothesis_violated("HypothesisViolated: w_lambda < 0 on Sigma \\ omega");
  }
  const auto pred = [&](const Index& i) {
    return frame.side(i) == -1 && omega(i) && margin_ok(g, i, q.near_cells);
  };
  const MinResult mn = min_on_region(w, pred);
  TrialOutcome out;
  if (mn.value >= 0.0) {
    out.vacuous = true;
    return out;
  }
  out.node = mn.node;
  const DecompositionResult d = operator_difference_decomposed(u, frame, mn.node, k, q);
  out.value = d.direct;
  out.i1 = d.I1;
  out.i2 = d.I2;
  return out;
}

namespace {

struct Bump {
  Point c{0, 0, 0};
  double rho = 1, amp = 1;
  double operator()(const Point& x, int n) const {
    double r2 = 0;
    for (int a = 0; a < n; ++a) {
      const double d = x[a] - c[a];
      r2 += d * d;
    }
    const double t = 1.0 - r2 / (rho * rho);
    return t > 0 ? amp * t * t : 0.0;
  }
};

GridFunction make_simple_trial(std::uint64_t seed, int dim, double h) {
  Rng rng(seed);
  Grid g = make_ball_grid(dim, h);
  Bump b;
  for (int a = 0; a < dim; ++a) b.c[a] = rng.uniform(-0.35, 0.35);
  b.rho = rng.uniform(0.15, 0.45);
  b.amp = rng.uniform(0.25, 4.0);
  GridFunction u(g);
  const long total = g.node_count();
  for (long f = 0; f < total; ++f) u.values[f] = -b(g.point(g.unflat(f)), dim);
  return u;
}

}  // namespace

AntisymTrial make_antisym_trial(std::uint64_t seed, int dim, double h, const KernelParams&,
                                const QuadratureConfig& q) {
  Rng rng(seed);
  const int extent = static_cast<int>(std::lround(1.5 / h));
  Grid g(dim, h, extent);
  const double L = g.half_width();

  const int axis = (dim >= 2 && rng.uniform() < 0.5) ? 1 : 0;
  const int sign = rng.uniform() < 0.5 ? +1 : -1;

  // plane offset chosen so that the slab between the plane and the left box
  // face keeps room for a resolvable dent plus quadrature margins
  const long room_min = 16;
  const long m_lo = -(2L * extent - 2 * room_min);
  const long m_hi = -std::max<long>(2, extent / 5);
  const long m_half = m_lo + rng.index(m_hi - m_lo + 1);
  const ReflectionFrame frame = ReflectionFrame::from_half_steps(axis, sign, m_half, g);
  const double lam = frame.lambda;
  const long room_h = extent + m_half / 2;  // cells between plane and box face

  // dent geometry in whole cells
  const long rho_cap = std::min<long>(room_h / 5, (room_h - q.near_cells - 5) / 2);
  const long rho_h = std::max<long>(2, static_cast<long>(rng.uniform(0.5, 1.0) * rho_cap));
  const long dc_lo = rho_h + 3;
  const long dc_hi = room_h - rho_h - q.near_cells - 2;
  const long dc_h = dc_lo + rng.index(std::max<long>(1, dc_hi - dc_lo + 1));

  const double rho_w = rho_h * h;
  const double amp_w = rng.uniform(0.25, 3.0);
  Point cw{0, 0, 0};
  cw[axis] = sign * (lam - dc_h * h);
  for (int a = 0; a < dim; ++a)
    if (a != axis) cw[a] = h * std::floor(rng.uniform(-0.3, 0.3) * extent);

  // symmetric bump about the plane, compact inside the box
  const double amp_v = rng.uniform(0.0, 1.5);
  const double rho_v = rng.uniform(0.35, 0.9) * std::fmax((room_h - 2) * h, 4.0 * h);
  Point cperp{0, 0, 0};
  for (int a = 0; a < dim; ++a)
    if (a != axis) cperp[a] = rng.uniform(-0.3 * L, 0.3 * L);

  Bump dent{cw, rho_w, amp_w};

  AntisymTrial trial{GridFunction(g), frame, GridFunction(g), {0, 0, 0}, (rho_h + 2) * h};
  for (int a = 0; a < dim; ++a) trial.omega_center[a] = static_cast<int>(std::lround(cw[a] / h));

  const long total = g.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    // exact symmetric coordinate: xi = (2*sign*i_axis - m_half) * h/2
    const long ihalf = 2L * sign * i[axis] - m_half;
    const double xi = static_cast<double>(ihalf) * (0.5 * h);
    double perp2 = 0;
    for (int a = 0; a < dim; ++a) {
      if (a == axis) continue;
      const double d = i[a] * h - cperp[a];
      perp2 += d * d;
    }
    const double tv = 1.0 - (xi * xi + perp2) / (rho_v * rho_v);
    const double v = tv > 0 ? amp_v * tv * tv : 0.0;

    const int side = frame.side(i);
    if (side == -1) {
      const double wval = -dent(g.point(i), dim);
      trial.w.values[f] = wval;
      trial.u.values[f] = v - 0.5 * wval;
    } else if (side == 0) {
      trial.u.values[f] = v;
    } else {
      const double wr = -dent(g.point(frame.reflect(i)), dim);
      trial.w.values[f] = -wr;
      trial.u.values[f] = v + 0.5 * wr;
    }
  }
  return trial;
}

namespace {

ExperimentReport run_suite(const std::string& name, const SuiteConfig& sc, const KernelParams& k,
                           const QuadratureConfig& q, bool antisym) {
  ExperimentReport rep;
  rep.name = name;
  rep.trials = sc.trials;
  rep.tolerances["violation"] = 0.0;
  rep.tolerances["i2_rel"] = 1e-12;
  rep.witnesses.assign(sc.trials, Witness{});

  parallel_for(sc.trials, [&](long t) {
    const std::uint64_t seed = sc.seed + static_cast<std::uint64_t>(t);
    Rng pick(seed ^ 0x9e3779b97f4a7c15ULL);
    int dim = 1;
    if (k.n >= 2 && pick.uniform() < sc.frac_2d) dim = 2;
    const double h = dim == 1 ? sc.h1 : sc.h2;
    const KernelParams kd(dim, k.s, k.p, k.C);
    Witness wit;
    wit.seed = seed;
    if (!antisym) {
      const GridFunction u = make_simple_trial(seed, dim, h);
      const auto omega = [&](const Index& i) { return u.grid.radius2(i) < 1.0; };
      const TrialOutcome out = check_simple_mp(u, omega, kd, q);
      wit.vacuous = out.vacuous;
      wit.node = out.node;
      wit.margin = out.value;
    } else {
      const AntisymTrial trial = make_antisym_trial(seed, dim, h, kd, q);
      const Index c = trial.omega_center;
      const double rad2 = trial.omega_radius * trial.omega_radius;
      const auto omega = [&](const Index& i) {
        double r2 = 0;
        for (int a = 0; a < dim; ++a) {
          const double d = (i[a] - c[a]) * h;
          r2 += d * d;
        }
        return r2 < rad2;
      };
      const TrialOutcome out = check_antisymmetric_mp(trial.u, trial.frame, omega, kd, q);
      wit.vacuous = out.vacuous;
      wit.node = out.node;
      wit.margin = out.value;
      wit.i1 = out.i1;
      wit.i2 = out.i2;
    }
    rep.witnesses[t] = wit;
  });

  double floor = std::numeric_limits<double>::infinity();
  for (const auto& w : rep.witnesses) {
    if (w.vacuous) {
      ++rep.vacuous;
      continue;
    }
    bool bad = !(w.margin < 0.0);
    if (antisym) {
      if (!(w.i1 < 0.0)) bad = true;
      if (!(w.i2 <= 1e-12 * std::fabs(w.i1))) bad = true;
    }
    if (bad) ++rep.violations;
    floor = std::fmin(floor, -w.margin);
  }
  rep.margin_floor = std::isfinite(floor) ? floor : 0.0;
  return rep;
}

}  // namespace

ExperimentReport run_simple_mp_suite(const SuiteConfig& sc, const KernelParams& k,
                                     const QuadratureConfig& q) {
  return run_suite("simple-mp", sc, k, q, false);
}

ExperimentReport run_antisym_mp_suite(const SuiteConfig& sc, const KernelParams& k,
                                      const QuadratureConfig& q) {
  return run_suite("antisym-mp", sc, k, q, true);
}

BoundarySequence boundary_estimate_sequence(const GridFunction& u, double lambda_o, int k_max,
                                            const KernelParams& k, const QuadratureConfig& q,
                                            int axis, int sign) {
  const Grid& g = u.grid;
  const double half = 0.5 * g.h;
  const long m_o = static_cast<long>(std::lround(lambda_o / half));
  const ReflectionFrame frame_o = ReflectionFrame::from_half_steps(axis, sign, m_o, g);

  const int near = q.near_cells;
  const auto make_region = [&u, near](const ReflectionFrame fr) {
    return [&u, near, fr](const Index& i) {
      if (fr.side(i) != -1 || !(u.at(i) > 0.0)) return false;
      for (int a = 0; a < u.grid.n; ++a)
        if (u.grid.extent - std::abs(i[a]) < near) return false;
      return true;
    };
  };

  {
    const auto reg = make_region(frame_o);
    const GridFunction w_o = w_lambda(u, frame_o);
    const long total = g.node_count();
    bool any = false;
    for (long f = 0; f < total; ++f) {
      const Index i = g.unflat(f);
      if (!reg(i)) continue;
      any = true;
      if (!(w_o.values[f] > 0.0))
        throw hypothesis_violated("HypothesisViolated: w_{lambda_o} <= 0 at an interior node");
    }
    if (!any) throw hypothesis_violated("HypothesisViolated: empty region for lambda_o");
  }

  BoundarySequence seq;
  seq.lambda_o = frame_o.lambda;
  const double delta_cap = std::fmin(0.5, std::fabs(frame_o.lambda));
  long prev_m = m_o;
  for (int kk = 1; kk <= k_max; ++kk) {
    const double lam = frame_o.lambda + std::ldexp(delta_cap, -kk);
    const long m = static_cast<long>(std::lround(lam / half));
    if (m == prev_m || m == m_o) continue;
    prev_m = m;
    const ReflectionFrame fr = ReflectionFrame::from_half_steps(axis, sign, m, g);
    const GridFunction w = w_lambda(u, fr);
    MinResult mn;
    try {
      mn = min_on_region(w, make_region(fr));
    } catch (const empty_region&) {
      continue;
    }
    const double delta = fr.plane_distance(mn.node, g.h);
    if (delta < g.h * (1.0 - 1e-9)) break;  // cannot resolve below grid scale
    const double diff = operator_difference_direct(u, fr, mn.node, k, q);
    seq.lambdas.push_back(fr.lambda);
    seq.points.push_back(mn.node);
    seq.deltas.push_back(delta);
    seq.quotients.push_back(diff / delta);
  }
  return seq;
}

void write_report_json(std::ostream& os, const ExperimentReport& r) {
  os << "{\"name\":\"" << r.name << "\",\"trials\":" << r.trials
     << ",\"violations\":" << r.violations << ",\"vacuous\":" << r.vacuous
     << ",\"margin_floor\":" << fmt17(r.margin_floor) << ",\"tolerances\":{";
  bool first = true;
  for (const auto& [key, val] : r.tolerances) {
    if (!first) os << ',';
    first = false;
    os << '"' << key << "\":" << fmt17(val);
  }
  os << "},\"witnesses\":[";
  for (size_t i = 0; i < r.witnesses.size(); ++i) {
    const auto& w = r.witnesses[i];
    if (i) os << ',';
    os << "{\"seed\":" << w.seed << ",\"node\":[" << w.node[0] << ',' << w.node[1] << ','
       << w.node[2] << "],\"margin\":" << fmt17(w.margin) << ",\"i1\":" << fmt17(w.i1)
       << ",\"i2\":" << fmt17(w.i2) << ",\"vacuous\":" << (w.vacuous ? "true" : "false") << '}';
  }
  os << "]}\n";
}

void write_report_csv(std::ostream& os, const ExperimentReport& r) {
  os << "trial,seed,margin,result\n";
  for (size_t i = 0; i < r.witnesses.size(); ++i) {
    const auto& w = r.witnesses[i];
    const char* result = w.vacuous ? "vacuous" : (w.margin < 0.0 ? "ok" : "violation");
    os << i << ',' << w.seed << ',' << fmt17(w.margin) << ',' << result << '\n';
  }
}

}  // namespace fplap
