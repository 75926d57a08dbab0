// Acceptance suite: runs every criterion end to end and prints one PASS/FAIL
// line each. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fplap/io.hpp"
#include "fplap/kernel.hpp"
#include "fplap/narrow.hpp"
#include "fplap/operator.hpp"
#include "fplap/parallel.hpp"
#include "fplap/principles.hpp"
#include "fplap/rng.hpp"
#include "fplap/solver.hpp"
#include "fplap/symmetry.hpp"
#include "oracle.hpp"

using namespace fplap;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int id, bool pass, const std::string& detail, double secs, double budget) {
  const bool in_budget = secs < budget;
  if (!pass || !in_budget) ++g_failures;
  std::printf("CRITERION %2d: %s  (%s; %.1fs of %.0fs budget)\n", id,
              pass && in_budget ? "PASS" : "FAIL", detail.c_str(), secs, budget);
  std::fflush(stdout);
}

std::string fnum(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// ---- 1: scalar kernel -------------------------------------------------

void criterion_1() {
  Timer timer;
  double mv_worst = 0;
  bool lemma_ok = true;
  Rng rng(20240616);
  for (long t = 0; t < 100000; ++t) {
    const double p = rng.uniform(2.1, 4.0);
    const KernelParams k(1, 0.45, p);
    double t1 = rng.uniform(-2.0, 2.0), t2 = rng.uniform(-2.0, 2.0);
    if (std::fabs(t1 - t2) < 1e-9) t2 += 0.5;
    const double xi = mean_value_xi(t1, t2, k);
    const double lhs = g_apply(t2, k) - g_apply(t1, k);
    const double rhs = (p - 1.0) * std::pow(xi, p - 2.0) * (t2 - t1);
    const double scale = std::fabs(g_apply(t1, k)) + std::fabs(g_apply(t2, k)) + 1e-30;
    mv_worst = std::fmax(mv_worst, std::fabs(lhs - rhs) / scale);
  }
  for (double p : {2.5, 3.0, 4.0}) {
    const KernelParams k(1, 0.45, p);
    const double co = lemma_constant(k, 100000);
    Rng prng(777);
    for (long t = 0; t < 100000; ++t) {
      double t1 = prng.uniform(-1.0, 1.0), t2 = prng.uniform(-1.0, 1.0);
      const double m = std::fmax(std::fabs(t1), std::fabs(t2));
      if (m < 1e-6 || std::fabs(t1 - t2) < 1e-9) continue;
      if (mean_value_xi(t1, t2, k) < 0.99 * co * m) lemma_ok = false;
    }
    if (!(co > 0)) lemma_ok = false;
  }
  report(1, mv_worst <= 1e-12 && lemma_ok,
         "mean-value residual " + fnum(mv_worst) + ", lemma inequality " +
             (lemma_ok ? "holds" : "violated"),
         timer.seconds(), 5.0);
}

// ---- 2: operator sanity ------------------------------------------------

GridFunction smooth_bump(const Grid& g, double rho, double amp) {
  GridFunction u(g, ExteriorRule::zero());
  for (long f = 0; f < g.node_count(); ++f) {
    const double r2 = g.radius2(g.unflat(f));
    const double t = 1.0 - r2 / (rho * rho);
    u.values[f] = t > 0 ? amp * t * t : 0.0;
  }
  return u;
}

void criterion_2() {
  Timer timer;
  bool ok = true;
  std::string detail;
  for (int dim : {1, 2}) {
    // 1D: N = 513 nodes; 2D: 65 x 65 nodes
    const Grid g = dim == 1 ? Grid(1, 1.0 / 64, 256) : Grid(2, 1.0 / 16, 32);
    const QuadratureConfig q;
    const KernelParams k(dim, 0.5, 2.5);
    const auto xs = interior_nodes(g, q.near_cells);

    // constant function with matching constant exterior
    GridFunction c(g, ExteriorRule::constant(0.8));
    for (auto& v : c.values) v = 0.8;
    const auto cv = evaluate_field(c, xs, k, q);
    for (const auto& b : cv)
      if (!(std::fabs(b.value) <= 1e-12 * 0.8)) ok = false;

    // odd function about the origin
    GridFunction o(g, ExteriorRule::zero());
    for (long f = 0; f < g.node_count(); ++f) {
      const Index i = g.unflat(f);
      const double r2 = g.radius2(i);
      const double t = 1.0 - r2;
      o.values[f] = t > 0 ? (i[0] * g.h) * t * t : 0.0;
    }
    for (double p : {2.0, 3.0}) {
      const KernelParams kp(dim, 0.5, p);
      if (!(std::fabs(frac_p_laplacian(o, {0, 0, 0}, kp, q)) <= 1e-10)) ok = false;
    }

    // homogeneity of degree p-1 and p=2 additivity
    const GridFunction u = smooth_bump(g, 0.8, 1.3);
    GridFunction ua = u;
    const double alpha = 1.7;
    for (auto& v : ua.values) v *= alpha;
    const KernelParams kh(dim, 0.5, 2.5);
    const Index probe = dim == 1 ? Index{11, 0, 0} : Index{3, -5, 0};
    const double h0 = frac_p_laplacian(u, probe, kh, q);
    const double h1 = frac_p_laplacian(ua, probe, kh, q);
    if (!(std::fabs(h1 - std::pow(alpha, 1.5) * h0) <= 1e-10 * std::fabs(h1) + 1e-14))
      ok = false;

    const GridFunction w = smooth_bump(g, 0.5, -0.6);
    GridFunction sum = u;
    for (long f = 0; f < g.node_count(); ++f) sum.values[f] += w.values[f];
    const KernelParams k2(dim, 0.5, 2.0);
    const double a0 = frac_p_laplacian(u, probe, k2, q);
    const double b0 = frac_p_laplacian(w, probe, k2, q);
    const double s0 = frac_p_laplacian(sum, probe, k2, q);
    if (!(std::fabs(s0 - (a0 + b0)) <= 1e-12 * (std::fabs(a0) + std::fabs(b0) + 1.0)))
      ok = false;
  }
  report(2, ok, "constant/odd/homogeneity/additivity bounds", timer.seconds(), 30.0);
}

// ---- 3: oracle equivalence ---------------------------------------------

void criterion_3() {
  Timer timer;
  const double h = 1.0 / 128;
  Grid g = make_ball_grid(1, h);
  const QuadratureConfig q;
  double worst = 0;
  for (double s : {0.3, 0.5, 0.7}) {
    GridFunction u(g, ExteriorRule::zero());
    for (long f = 0; f < g.node_count(); ++f) {
      const double x = g.unflat(f)[0] * h;
      u.values[f] = x * x < 1.0 ? std::pow(1.0 - x * x, s) : 0.0;
    }
    const KernelParams k(1, s, 2.0);
    auto uf = [s](double x) { return x * x < 1.0 ? std::pow(1.0 - x * x, s) : 0.0; };
    std::vector<Index> xs;
    for (int i = -115; i <= 115; ++i) xs.push_back({i, 0, 0});
    const auto vals = evaluate_field(u, xs, k, q);
    for (size_t j = 0; j < xs.size(); ++j) {
      const double ref = oracle::frac_laplacian_1d(uf, xs[j][0] * h, s);
      worst = std::fmax(worst, std::fabs(vals[j].value - ref) / std::fabs(ref));
    }
  }
  report(3, worst <= 0.02, "max relative deviation from the quadrature oracle " + fnum(worst),
         timer.seconds(), 60.0);
}

// ---- 4: decomposition route equality ------------------------------------

void criterion_4() {
  Timer timer;
  Rng rng(555);
  double worst = 0;
  long trials = 0;
  while (trials < 100) {
    const int dim = trials % 3 == 0 ? 2 : 1;
    const double h = dim == 1 ? 1.0 / 48 : 1.0 / 12;
    Grid g(dim, h, dim == 1 ? 60 : 15);
    GridFunction u(g, ExteriorRule::zero());
    const int bumps = 1 + static_cast<int>(rng.index(3));
    for (int b = 0; b < bumps; ++b) {
      Point c{0, 0, 0};
      for (int a = 0; a < dim; ++a) c[a] = rng.uniform(-0.5, 0.5) * g.half_width();
      const double rho = rng.uniform(0.2, 0.45) * g.half_width();
      const double amp = rng.uniform(-1.5, 1.5);
      for (long f = 0; f < g.node_count(); ++f) {
        const Point x = g.point(g.unflat(f));
        double r2 = 0;
        for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        const double t = 1.0 - r2 / (rho * rho);
        if (t > 0) u.values[f] += amp * t * t;
      }
    }
    const KernelParams k(dim, rng.uniform(0.2, 0.8), 2.0 + rng.uniform(0.0, 2.0));
    const QuadratureConfig q;
    const long m = -static_cast<long>(rng.index(g.extent)) - 2;
    const ReflectionFrame fr = ReflectionFrame::from_half_steps(0, +1, m, g);
    Index x{0, 0, 0};
    x[0] = static_cast<int>(-g.extent + 5 + rng.index(std::max(1L, m / 2 - 5 + g.extent)));
    if (fr.side(x) != -1) continue;
    const DecompositionResult d = operator_difference_decomposed(u, fr, x, k, q);
    worst = std::fmax(worst,
                      std::fabs(d.C_times_sum - d.direct) / (std::fabs(d.direct) + 1e-14));
    ++trials;
  }
  report(4, worst <= 1e-8, "route disagreement " + fnum(worst) + " over 100 profiles",
         timer.seconds(), 60.0);
}

// ---- 5: maximum principle suites ----------------------------------------

void criterion_5() {
  Timer timer;
  SuiteConfig sc;
  sc.trials = 1000;
  sc.seed = 42;
  const QuadratureConfig q;
  const KernelParams k(2, 0.5, 3.0);
  const ExperimentReport simple = run_simple_mp_suite(sc, k, q);
  const ExperimentReport anti = run_antisym_mp_suite(sc, k, q);
  const bool ok = simple.violations == 0 && anti.violations == 0 && anti.vacuous == 0 &&
                  simple.margin_floor > 0 && anti.margin_floor > 0;
  report(5, ok,
         "simple-mp violations " + std::to_string(simple.violations) + "/1000, antisym-mp " +
             std::to_string(anti.violations) + "/1000, margins " + fnum(simple.margin_floor) +
             "/" + fnum(anti.margin_floor),
         timer.seconds(), 300.0);
}

// ---- 6: boundary estimate ------------------------------------------------

void criterion_6() {
  Timer timer;
  bool ok = true;
  std::string detail;
  const double h = 1.0 / 64;
  const QuadratureConfig q;
  const struct {
    double p, s;
  } cases[] = {{2.0, 0.5}, {3.0, 0.5}, {3.0, 0.7}};
  for (const auto& c : cases) {
    const KernelParams k(1, c.s, c.p);
    SolveConfig cfg;
    cfg.relaxation = 1.0;
    cfg.max_iters = 30000;
    const Solution sol = solve_ball_power(make_ball_grid(1, h), c.p, k, q, cfg);
    if (!sol.converged) {
      ok = false;
      continue;
    }
    const BoundarySequence seq = boundary_estimate_sequence(sol.u, -0.25, 8, k, q);
    long small = 0;
    for (size_t i = 0; i < seq.deltas.size(); ++i) {
      if (seq.deltas[i] <= 4.0 * h + 1e-12) {
        ++small;
        if (!(seq.quotients[i] < 0.0)) ok = false;
      }
    }
    if (small == 0) ok = false;
    detail += fnum(c.p) + "/" + fnum(c.s) + ":" + std::to_string(small) + " ";
  }
  report(6, ok, "small-delta quotients all negative (" + detail + ")", timer.seconds(), 120.0);
}

// ---- 7: symmetry conclusions ----------------------------------------------

void criterion_7() {
  Timer timer;
  bool ok = true;
  std::ostringstream detail;
  const QuadratureConfig q;
  const struct {
    double p, s;
  } ps[] = {{2.0, 0.5}, {3.0, 0.5}};
  for (const auto& c : ps) {
    for (double qe : {c.p - 1.0, c.p}) {
      // per-combination metrics at 1D resolution h = 1/128
      {
        const double h = 1.0 / 128;
        const KernelParams k(1, c.s, c.p);
        SolveConfig cfg;
        cfg.relaxation = 1.0;
        cfg.max_iters = 40000;
        const Solution sol = solve_ball_power(make_ball_grid(1, h), qe, k, q, cfg);
        if (!sol.converged) ok = false;
        const SymmetryReport rep = symmetry_report(sol.u);
        if (!(rep.asymmetry < 1e-3)) ok = false;
        if (rep.monotonicity_violations != 0) ok = false;
        for (const auto& d : rep.lambda0)
          if (!(std::fabs(d.lambda0) <= 0.5 * h + 1e-12)) ok = false;
      }
      // moving-plane scan in all four axis directions at 2D resolution h = 1/32
      {
        const double h = 1.0 / 32;
        const KernelParams k(2, c.s, c.p);
        SolveConfig cfg;
        cfg.relaxation = 1.0;
        cfg.max_iters = 30000;
        const Solution sol = solve_ball_power(make_ball_grid(2, h), qe, k, q, cfg);
        if (!sol.converged) ok = false;
        long directions = 0;
        double lam_max = 0;
        for (int axis : {0, 1}) {
          for (int sign : {+1, -1}) {
            const ScanResult sc = moving_plane_scan(sol.u, axis, sign);
            lam_max = std::fmax(lam_max, std::fabs(sc.lambda0));
            ++directions;
          }
        }
        if (directions != 4 || !(lam_max <= 0.5 * h + 1e-12)) ok = false;
        detail << "p" << c.p << "q" << qe << ":lam" << fnum(lam_max) << " ";
      }
    }
  }
  report(7, ok, "1d metrics + four-direction scans (" + detail.str() + ")", timer.seconds(),
         600.0);
}

// ---- 8: whole-space consistency -------------------------------------------

void criterion_8() {
  Timer timer;
  // with C = 1/pi (the standard constant) the continuum ground state of
  // u'' ~ u^2 - u has width O(1), so the L = 4 truncation is meaningful
  const double pi = 3.14159265358979323846;
  const KernelParams k(1, 0.5, 2.0, 1.0 / pi);
  const QuadratureConfig q;
  SolveConfig cfg;
  cfg.relaxation = 1.0;
  cfg.max_iters = 60000;
  cfg.tol_residual = 1e-5;
  const double h = 1.0 / 32;
  bool ok = true;
  std::string detail;

  const Solution base = solve_whole_space(WholeSpaceNonlinearity::power_minus_linear(2.0, 1.0),
                                          k, q, cfg, 4.0, h);
  if (!base.converged) ok = false;
  const SymmetryReport rep = symmetry_report(base.u);
  if (!(rep.asymmetry < 5e-3)) ok = false;
  for (const auto& i : interior_nodes(base.u.grid, 4))
    if (!(base.u.at(i) > 0.0)) ok = false;
  if (!(base.u.exterior.alpha > 0.5)) ok = false;
  detail = "asym " + fnum(rep.asymmetry);

  // translation covariance: a shifted initial bump moves the detected center
  const Solution shifted = solve_whole_space(
      WholeSpaceNonlinearity::power_minus_linear(2.0, 1.0), k, q, cfg, 4.0, h, {8.0 * h, 0, 0});
  if (!shifted.converged) ok = false;
  const SymmetryReport rep2 = symmetry_report(shifted.u);
  const double moved = (rep2.center[0] - rep.center[0]) * h;
  if (!(std::fabs(moved - 8.0 * h) <= h + 1e-12)) ok = false;
  detail += ", center moved " + fnum(moved) + " for a shift of " + fnum(8.0 * h);

  report(8, ok, detail, timer.seconds(), 300.0);
}

// ---- 9: narrow-region probe -----------------------------------------------

void criterion_9() {
  Timer timer;
  const KernelParams k(1, 0.5, 3.0);
  const QuadratureConfig q;
  const NarrowRegionSuite suite =
      run_narrow_region_suite({0.2, 0.1, 0.05, 0.025}, 3.0, k, q, 1.0 / 256);
  bool ok = suite.loglog_slope <= -k.sp() + 0.1 && suite.c2 > 0;
  for (const auto& p : suite.probes)
    if (p.delta <= 0.05 + 1e-12 && !p.contradiction_holds) ok = false;
  report(9, ok,
         "log-log slope " + fnum(suite.loglog_slope) + " (<= " + fnum(-k.sp() + 0.1) +
             "), c2 " + fnum(suite.c2),
         timer.seconds(), 120.0);
}

// ---- 10: determinism --------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void criterion_10(const std::string& cli) {
  Timer timer;
  bool ok = !cli.empty();
  if (ok) {
    const std::string dir = "/tmp/fplap_acceptance_det";
    std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str());
    {
      std::ofstream f(dir + "/lemma.json");
      f << "{\"suite\":\"lemma\",\"samples\":50000,\"mv_samples\":50000,"
           "\"out_prefix\":\"lemma\"}";
    }
    {
      std::ofstream f(dir + "/mp.json");
      f << "{\"suite\":\"antisym-mp\",\"params\":{\"n\":2,\"s\":0.5,\"p\":3},"
           "\"trials\":60,\"seed\":11,\"out_prefix\":\"mp\"}";
    }
    for (const char* cfgname : {"lemma", "mp"}) {
      std::string blob[3];
      int wi = 0;
      for (int w : {1, 4, 8}) {
        const std::string cmd = cli + " verify --config " + dir + "/" + cfgname +
                                ".json --out-dir " + dir + " --workers " + std::to_string(w) +
                                " >/dev/null 2>&1";
        if (std::system(cmd.c_str()) == -1) ok = false;
        blob[wi++] = slurp(dir + "/" + std::string(cfgname) + ".json") +
                     slurp(dir + "/" + std::string(cfgname) + ".csv");
        if (blob[wi - 1].empty()) ok = false;
      }
      if (blob[0] != blob[1] || blob[1] != blob[2]) ok = false;
    }
  }
  report(10, ok, "verify outputs byte-identical for workers {1,4,8}", timer.seconds(), 120.0);
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }
  std::printf("fplap acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10(cli);
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
