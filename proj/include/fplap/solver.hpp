#pragma once

#include <functional>
#include <vector>

#include "fplap/grid.hpp"
#include "fplap/kernel.hpp"
#include "fplap/operator.hpp"
#include "fplap/quadrature.hpp"

namespace fplap {

struct non_positive_iterate : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct decay_fit_failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolveConfig {
  long max_iters = 20000;      // total Jacobi sweeps
  double tol_residual = 1e-6;  // relative residual target
  double relaxation = 0.5;     // omega in (0, 1]
  double normalization = 1.0;  // fixed max of the eigen-type iterate
  long max_outer = 200;        // outer iterations (inverse iteration / rescaling)

  void validate() const;
};

struct Solution {
  GridFunction u;
  std::vector<double> residual_history;
  long iterations = 0;
  bool converged = false;
  double mu = 1.0;
};

// Damped nonlinear Jacobi for (-Delta)_p^s u = f in {|x| < 1}, u = 0 outside.
// Each sweep solves the strictly increasing per-node scalar equation by a
// bracketed regula-falsi (bisection family; no derivatives, brackets always
// valid), then relaxes by omega.
Solution solve_dirichlet_rhs(const GridFunction& f, const KernelParams& k,
                             const QuadratureConfig& q, const SolveConfig& cfg);

// Normalized inverse iteration for (-Delta)_p^s u = mu u^q in the unit ball.
// Scale is fixed by max u = normalization; mu is reported, not assumed.
Solution solve_ball_power(const Grid& grid, double q_exp, const KernelParams& k,
                          const QuadratureConfig& q, const SolveConfig& cfg);

struct WholeSpaceNonlinearity {
  enum class Kind { Zero, PowerMinusLinear, Custom } kind = Kind::PowerMinusLinear;
  // g(u) = u^q - a u with a > 0 (g'(0) = -a <= 0 as Thm 5.1 requires)
  double q_exp = 2.0;
  double a = 1.0;
  // custom scalar map and derivative; solved by damped iteration only
  std::function<double(double)> g, g_prime;

  static WholeSpaceNonlinearity zero();
  static WholeSpaceNonlinearity power_minus_linear(double q_exp, double a);
  static WholeSpaceNonlinearity custom(std::function<double(double)> g,
                                       std::function<double(double)> gp);
};

// Truncated whole-space problem (-Delta)_p^s u = g(u) on [-L, L]^n with a
// PowerDecay exterior whose (A, alpha) are refitted from the outer shell each
// outer iteration. For the power-minus-linear family the amplitude is pinned
// by a normalized two-parameter rescaling (the plain damped iteration has an
// unstable amplitude mode); custom maps run the damped iteration as-is.
Solution solve_whole_space(const WholeSpaceNonlinearity& gspec, const KernelParams& k,
                           const QuadratureConfig& q, const SolveConfig& cfg, double box_L,
                           double h, const Point& init_center = {0, 0, 0});

// Least-squares power fit v ~ A |x|^{-alpha} over the given nodes; returns
// {A, alpha, max relative misfit}.
struct DecayFit {
  double A = 0, alpha = 0, max_rel_misfit = 0;
};
DecayFit fit_power_decay(const GridFunction& v, const std::vector<Index>& shell);

}  // namespace fplap
