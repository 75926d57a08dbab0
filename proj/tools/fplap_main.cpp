#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fplap/io.hpp"
#include "fplap/kernel.hpp"
#include "fplap/narrow.hpp"
#include "fplap/operator.hpp"
#include "fplap/parallel.hpp"
#include "fplap/principles.hpp"
#include "fplap/rng.hpp"
#include "fplap/solver.hpp"
#include "fplap/symmetry.hpp"

using nlohmann::json;
using namespace fplap;

namespace {

// exit-code vocabulary: 0 ok, 2 input, 3 precondition, 4 non-convergence,
// 5 violation
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNotConverged = 4;
constexpr int kExitViolation = 5;

struct RunPaths {
  std::string out_dir = ".";
  std::string out(const std::string& name) const {
    if (out_dir.empty() || out_dir == ".") return name;
    return out_dir + "/" + name;
  }
};

json load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw parse_error("config parse error at byte " + std::to_string(e.byte) + ": " + e.what(),
                      static_cast<long>(e.byte));
  }
}

KernelParams params_from(const json& j) {
  const auto& p = j.at("params");
  return KernelParams(p.at("n").get<int>(), p.at("s").get<double>(), p.at("p").get<double>(),
                      p.value("C", 1.0));
}

QuadratureConfig quad_from(const json& j) {
  QuadratureConfig q;
  if (j.contains("quadrature")) {
    const auto& c = j.at("quadrature");
    q.near_cells = c.value("near_cells", 4);
    q.tail_radius = c.value("tail_radius", 0.0);
    q.ordering = c.value("ordering", std::string("radius-lex"));
  }
  q.validate();
  return q;
}

SolveConfig solve_from(const json& j) {
  SolveConfig cfg;
  if (j.contains("solve")) {
    const auto& c = j.at("solve");
    cfg.max_iters = c.value("max_iters", cfg.max_iters);
    cfg.tol_residual = c.value("tol_residual", cfg.tol_residual);
    cfg.relaxation = c.value("relaxation", cfg.relaxation);
    cfg.normalization = c.value("normalization", cfg.normalization);
    cfg.max_outer = c.value("max_outer", cfg.max_outer);
  }
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << body;
}

int cmd_eval(const json& cfg, const RunPaths& paths) {
  const KernelParams k = params_from(cfg);
  const QuadratureConfig q = quad_from(cfg);
  const GridFunction u = read_grid_function_file(cfg.at("input").get<std::string>());
  if (u.grid.n != k.n) throw std::invalid_argument("input dimension does not match params.n");

  std::vector<Index> xs;
  if (!cfg.contains("points") || cfg.at("points") == "interior") {
    xs = interior_nodes(u.grid, q.near_cells);
  } else {
    for (const auto& row : cfg.at("points")) {
      Index i{0, 0, 0};
      for (int a = 0; a < u.grid.n; ++a) i[a] = row.at(a).get<int>();
      xs.push_back(i);
    }
  }
  const auto vals = evaluate_field(u, xs, k, q);
  std::ostringstream os;
  for (size_t j = 0; j < xs.size(); ++j) {
    const Point x = u.grid.point(xs[j]);
    os << "{\"x\":[";
    for (int a = 0; a < u.grid.n; ++a) os << (a ? "," : "") << fmt17(x[a]);
    os << "],\"value\":" << fmt17(vals[j].value) << ",\"near\":" << fmt17(vals[j].near)
       << ",\"mid\":" << fmt17(vals[j].mid) << ",\"tail\":" << fmt17(vals[j].tail) << "}\n";
  }
  write_text(paths.out(cfg.value("output", std::string("eval.jsonl"))), os.str());
  return kExitOk;
}

void write_solution(const Solution& sol, const std::string& prefix, const RunPaths& paths) {
  {
    std::ofstream f(paths.out(prefix + ".json"));
    write_grid_function_json(f, sol.u);
  }
  {
    std::ofstream f(paths.out(prefix + ".csv"));
    write_grid_function_csv(f, sol.u);
  }
  std::ostringstream meta;
  meta << "{\"mu\":" << fmt17(sol.mu) << ",\"iterations\":" << sol.iterations
       << ",\"converged\":" << (sol.converged ? "true" : "false") << ",\"residual_history\":[";
  for (size_t i = 0; i < sol.residual_history.size(); ++i)
    meta << (i ? "," : "") << fmt17(sol.residual_history[i]);
  meta << "]}\n";
  write_text(paths.out(prefix + "_meta.json"), meta.str());
}

int cmd_solve(const json& cfg, const RunPaths& paths) {
  const KernelParams k = params_from(cfg);
  const QuadratureConfig q = quad_from(cfg);
  const SolveConfig sc = solve_from(cfg);
  const std::string problem = cfg.at("problem").get<std::string>();
  const std::string prefix = cfg.value("out_prefix", std::string("solution"));

  Solution sol;
  if (problem == "dirichlet_rhs") {
    const GridFunction f = read_grid_function_file(cfg.at("rhs").get<std::string>());
    sol = solve_dirichlet_rhs(f, k, q, sc);
  } else if (problem == "ball_power") {
    const double h = cfg.at("grid").at("h").get<double>();
    sol = solve_ball_power(make_ball_grid(k.n, h), cfg.at("q_exp").get<double>(), k, q, sc);
  } else if (problem == "whole_space") {
    const auto& gj = cfg.at("g");
    const std::string kind = gj.at("kind").get<std::string>();
    WholeSpaceNonlinearity gspec;
    if (kind == "zero") {
      gspec = WholeSpaceNonlinearity::zero();
    } else if (kind == "power_minus_linear") {
      gspec = WholeSpaceNonlinearity::power_minus_linear(gj.at("q").get<double>(),
                                                         gj.value("a", 1.0));
    } else {
      throw std::invalid_argument("unknown nonlinearity kind: " + kind);
    }
    Point c0{0, 0, 0};
    if (cfg.contains("init_center")) {
      for (int a = 0; a < k.n; ++a) c0[a] = cfg.at("init_center").at(a).get<double>();
    }
    sol = solve_whole_space(gspec, k, q, sc, cfg.value("box_L", 4.0),
                            cfg.at("grid").at("h").get<double>(), c0);
  } else {
    throw std::invalid_argument("unknown problem: " + problem);
  }
  write_solution(sol, prefix, paths);
  return sol.converged ? kExitOk : kExitNotConverged;
}

// ---- verify suites ----------------------------------------------------

int verify_lemma(const json& cfg, const RunPaths& paths, const std::string& prefix) {
  const long samples = cfg.value("samples", 100000L);
  const long mv_samples = cfg.value("mv_samples", 100000L);
  std::vector<double> pvals{2.5, 3.0, 4.0};
  if (cfg.contains("p_values")) {
    pvals.clear();
    for (const auto& v : cfg.at("p_values")) pvals.push_back(v.get<double>());
  }
  long violations = 0;
  std::ostringstream csv, js;
  csv << "p,c_o,min_ratio,mv_residual,violations\n";
  js << "{\"name\":\"lemma\",\"cases\":[";
  for (size_t pi = 0; pi < pvals.size(); ++pi) {
    const double p = pvals[pi];
    const KernelParams k(1, 0.5, p);
    const double co = lemma_constant(k, samples);
    long bad = 0;
    double min_ratio = 1e300, mv_worst = 0;
    Rng rng(1234);
    for (long t = 0; t < mv_samples; ++t) {
      double t1 = rng.uniform(-1.0, 1.0), t2 = rng.uniform(-1.0, 1.0);
      const double m = std::fmax(std::fabs(t1), std::fabs(t2));
      if (m < 1e-6 || std::fabs(t1 - t2) < 1e-9) continue;
      const double xi = mean_value_xi(t1, t2, k);
      min_ratio = std::fmin(min_ratio, xi / m);
      if (xi < 0.99 * co * m) ++bad;
      const double lhs = g_apply(t2, k) - g_apply(t1, k);
      const double rhs = (p - 1.0) * std::pow(xi, p - 2.0) * (t2 - t1);
      const double scale = std::fabs(g_apply(t1, k)) + std::fabs(g_apply(t2, k)) + 1e-30;
      mv_worst = std::fmax(mv_worst, std::fabs(lhs - rhs) / scale);
    }
    if (mv_worst > 1e-12) ++bad;
    violations += bad;
    csv << fmt17(p) << ',' << fmt17(co) << ',' << fmt17(min_ratio) << ',' << fmt17(mv_worst)
        << ',' << bad << '\n';
    js << (pi ? "," : "") << "{\"p\":" << fmt17(p) << ",\"c_o\":" << fmt17(co)
       << ",\"mv_residual\":" << fmt17(mv_worst) << ",\"violations\":" << bad << '}';
  }
  // sub-2 exponents: the ratio infimum is reported, not asserted
  const double diag = lemma_ratio_infimum_unchecked(KernelParams(1, 0.3, 1.5), samples);
  js << "],\"p15_ratio_infimum\":" << fmt17(diag) << ",\"violations\":" << violations << "}\n";
  write_text(paths.out(prefix + ".csv"), csv.str());
  write_text(paths.out(prefix + ".json"), js.str());
  return violations == 0 ? kExitOk : kExitViolation;
}

int verify_mp(const json& cfg, const RunPaths& paths, const std::string& prefix, bool antisym) {
  const KernelParams k = params_from(cfg);
  const QuadratureConfig q = quad_from(cfg);
  SuiteConfig sc;
  sc.trials = cfg.value("trials", 1000L);
  sc.seed = cfg.value("seed", static_cast<std::uint64_t>(42));
  sc.h1 = cfg.value("h1", sc.h1);
  sc.h2 = cfg.value("h2", sc.h2);
  sc.frac_2d = cfg.value("frac_2d", sc.frac_2d);
  const ExperimentReport rep =
      antisym ? run_antisym_mp_suite(sc, k, q) : run_simple_mp_suite(sc, k, q);
  std::ostringstream js, csv;
  write_report_json(js, rep);
  write_report_csv(csv, rep);
  write_text(paths.out(prefix + ".json"), js.str());
  write_text(paths.out(prefix + ".csv"), csv.str());
  return rep.violations == 0 ? kExitOk : kExitViolation;
}

int verify_boundary(const json& cfg, const RunPaths& paths, const std::string& prefix) {
  const QuadratureConfig q = quad_from(cfg);
  const double h = cfg.value("h", 1.0 / 64);
  const double lambda_o = cfg.value("lambda_o", -0.25);
  const int k_max = cfg.value("k_max", 8);
  long violations = 0;
  std::ostringstream csv, js;
  csv << "p,s,q_exp,lambda,delta,quotient\n";
  js << "{\"name\":\"boundary\",\"cases\":[";
  size_t ci = 0;
  for (const auto& cj : cfg.at("cases")) {
    const double p = cj.at("p").get<double>();
    const double s = cj.at("s").get<double>();
    const double qe = cj.value("q_exp", p);
    const KernelParams k(1, s, p, cj.value("C", 1.0));
    const SolveConfig scfg = solve_from(cfg);
    const Solution sol = solve_ball_power(make_ball_grid(1, h), qe, k, q, scfg);
    if (!sol.converged) throw std::runtime_error("boundary suite: ball solve did not converge");
    const BoundarySequence seq = boundary_estimate_sequence(sol.u, lambda_o, k_max, k, q);
    long bad = 0;
    for (size_t i = 0; i < seq.lambdas.size(); ++i) {
      csv << fmt17(p) << ',' << fmt17(s) << ',' << fmt17(qe) << ',' << fmt17(seq.lambdas[i])
          << ',' << fmt17(seq.deltas[i]) << ',' << fmt17(seq.quotients[i]) << '\n';
      if (seq.deltas[i] <= 4.0 * h + 1e-12 && !(seq.quotients[i] < 0.0)) ++bad;
    }
    violations += bad;
    js << (ci++ ? "," : "") << "{\"p\":" << fmt17(p) << ",\"s\":" << fmt17(s)
       << ",\"entries\":" << seq.lambdas.size() << ",\"violations\":" << bad << '}';
  }
  js << "],\"violations\":" << violations << "}\n";
  write_text(paths.out(prefix + ".csv"), csv.str());
  write_text(paths.out(prefix + ".json"), js.str());
  return violations == 0 ? kExitOk : kExitViolation;
}

int verify_narrow(const json& cfg, const RunPaths& paths, const std::string& prefix) {
  const KernelParams k = params_from(cfg);
  const QuadratureConfig q = quad_from(cfg);
  const double h = cfg.value("h", 1.0 / 256);
  const double qe = cfg.value("q_exp", k.p);
  std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
  if (cfg.contains("deltas")) {
    deltas.clear();
    for (const auto& d : cfg.at("deltas")) deltas.push_back(d.get<double>());
  }
  const NarrowRegionSuite suite = run_narrow_region_suite(deltas, qe, k, q, h);
  long violations = 0;
  if (!(suite.loglog_slope <= -k.sp() + 0.1)) ++violations;
  if (!(suite.c2 > 0.0)) ++violations;
  for (const auto& p : suite.probes)
    if (p.delta <= 0.05 + 1e-12 && !p.contradiction_holds) ++violations;
  std::ostringstream csv, js;
  write_narrow_csv(csv, suite);
  js << "{\"name\":\"narrow-region\",\"loglog_slope\":" << fmt17(suite.loglog_slope)
     << ",\"c2\":" << fmt17(suite.c2) << ",\"violations\":" << violations << "}\n";
  write_text(paths.out(prefix + ".csv"), csv.str());
  write_text(paths.out(prefix + ".json"), js.str());
  return violations == 0 ? kExitOk : kExitViolation;
}

int verify_symmetry(const json& cfg, const RunPaths& paths, const std::string& prefix) {
  const QuadratureConfig q = quad_from(cfg);
  const double asym_tol = cfg.value("asym_tol", 1e-3);
  long violations = 0;
  std::ostringstream csv, js;
  csv << "n,p,s,q_exp,asymmetry,monotonicity_violations,lambda0_max\n";
  js << "{\"name\":\"symmetry\",\"cases\":[";
  size_t ci = 0;
  for (const auto& cj : cfg.at("cases")) {
    const double p = cj.at("p").get<double>();
    const double s = cj.at("s").get<double>();
    const double qe = cj.value("q_exp", p);
    const int dim = cj.value("n", 1);
    const double h = cj.value("h", dim == 1 ? 1.0 / 128 : 1.0 / 32);
    const bool check_asym = cj.value("check_asymmetry", dim == 1);
    const KernelParams k(dim, s, p, cj.value("C", 1.0));
    const SolveConfig scfg = solve_from(cfg);
    const Solution sol = solve_ball_power(make_ball_grid(dim, h), qe, k, q, scfg);
    if (!sol.converged) throw std::runtime_error("symmetry suite: ball solve did not converge");
    const SymmetryReport rep = symmetry_report(sol.u);
    double lam_max = 0;
    for (const auto& d : rep.lambda0) lam_max = std::fmax(lam_max, std::fabs(d.lambda0));
    long bad = 0;
    if (check_asym && !(rep.asymmetry < asym_tol)) ++bad;
    if (check_asym && rep.monotonicity_violations != 0) ++bad;
    if (!(lam_max <= 0.5 * h + 1e-12)) ++bad;
    violations += bad;
    csv << dim << ',' << fmt17(p) << ',' << fmt17(s) << ',' << fmt17(qe) << ','
        << fmt17(rep.asymmetry) << ',' << rep.monotonicity_violations << ',' << fmt17(lam_max)
        << '\n';
    js << (ci++ ? "," : "") << "{\"n\":" << dim << ",\"p\":" << fmt17(p) << ",\"s\":" << fmt17(s)
       << ",\"asymmetry\":" << fmt17(rep.asymmetry)
       << ",\"lambda0_max\":" << fmt17(lam_max) << ",\"violations\":" << bad << '}';
  }
  js << "],\"violations\":" << violations << "}\n";
  write_text(paths.out(prefix + ".csv"), csv.str());
  write_text(paths.out(prefix + ".json"), js.str());
  return violations == 0 ? kExitOk : kExitViolation;
}

int cmd_verify(const json& cfg, const RunPaths& paths) {
  const std::string suite = cfg.at("suite").get<std::string>();
  const std::string prefix = cfg.value("out_prefix", suite);
  if (suite == "lemma") return verify_lemma(cfg, paths, prefix);
  if (suite == "simple-mp") return verify_mp(cfg, paths, prefix, false);
  if (suite == "antisym-mp") return verify_mp(cfg, paths, prefix, true);
  if (suite == "boundary") return verify_boundary(cfg, paths, prefix);
  if (suite == "narrow-region") return verify_narrow(cfg, paths, prefix);
  if (suite == "symmetry") return verify_symmetry(cfg, paths, prefix);
  throw std::invalid_argument("unknown suite: " + suite);
}

int cmd_scan(const json& cfg, const RunPaths& paths) {
  const GridFunction u = read_grid_function_file(cfg.at("input").get<std::string>());
  const int axis = cfg.value("axis", 0);
  const int sign = cfg.value("sign", 1);
  const ScanResult sc = moving_plane_scan(u, axis, sign, cfg.value("tol_rel", 1e-8));
  const std::string prefix = cfg.value("out_prefix", std::string("scan"));
  std::ostringstream csv;
  write_scan_csv(csv, sc);
  write_text(paths.out(prefix + ".csv"), csv.str());
  std::ostringstream js;
  js << "{\"axis\":" << axis << ",\"sign\":" << sign << ",\"lambda0\":" << fmt17(sc.lambda0)
     << "}\n";
  write_text(paths.out(prefix + ".json"), js.str());
  return kExitOk;
}

int cmd_report(const json& cfg, const RunPaths& paths) {
  const GridFunction u = read_grid_function_file(cfg.at("input").get<std::string>());
  SymmetryReport rep;
  if (cfg.contains("center") && cfg.at("center").is_array()) {
    Index c{0, 0, 0};
    for (int a = 0; a < u.grid.n; ++a) c[a] = cfg.at("center").at(a).get<int>();
    rep = symmetry_report(u, c);
  } else {
    rep = symmetry_report(u);
  }
  std::ostringstream js;
  write_symmetry_json(js, rep);
  write_text(paths.out(cfg.value("out_prefix", std::string("report")) + ".json"), js.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fplap: fractional p-Laplacian lattice toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = -1;

  for (const char* name : {"eval", "solve", "verify", "scan", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out-dir", out_dir, "output directory override");
    sub->add_option("--workers", workers, "worker count (0 = all cores)");
  }

  CLI11_PARSE(app, argc, argv);

  RunPaths paths;
  if (const char* env = std::getenv("FPLAP_OUT_DIR")) paths.out_dir = env;
  if (!out_dir.empty()) paths.out_dir = out_dir;

  try {
    const json cfg = load_config(config_path);
    // workers: config, then env, then flag; results never depend on the value
    int w = cfg.value("workers", 0);
    if (const char* env = std::getenv("FPLAP_WORKERS")) w = std::atoi(env);
    if (workers >= 0) w = workers;
    set_workers(w);

    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "eval") return cmd_eval(cfg, paths);
    if (sub == "solve") return cmd_solve(cfg, paths);
    if (sub == "verify") return cmd_verify(cfg, paths);
    if (sub == "scan") return cmd_scan(cfg, paths);
    return cmd_report(cfg, paths);
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const invalid_regime& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const quadrature_precondition& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const non_positive_iterate& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const decay_fit_failed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotConverged;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
