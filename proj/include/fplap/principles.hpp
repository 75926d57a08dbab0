#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fplap/grid.hpp"
#include "fplap/kernel.hpp"
#include "fplap/operator.hpp"

namespace fplap {

struct hypothesis_violated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Witness {
  std::uint64_t seed = 0;
  Index node{0, 0, 0};
  double margin = 0;  // signed; positive means violation
  double i1 = 0, i2 = 0;
  bool vacuous = false;
};

struct ExperimentReport {
  std::string name;
  long trials = 0;
  long violations = 0;
  long vacuous = 0;
  double margin_floor = 0;  // min over non-vacuous trials of -margin
  std::map<std::string, double> tolerances;
  std::vector<Witness> witnesses;
};

void write_report_json(std::ostream& os, const ExperimentReport& r);
void write_report_csv(std::ostream& os, const ExperimentReport& r);

using RegionPred = std::function<bool(const Index&)>;

struct TrialOutcome {
  bool vacuous = false;
  Index node{0, 0, 0};
  double value = 0;  // the signed quantity asserted negative
  double i1 = 0, i2 = 0;
};

// At the interior negative minimum of u over omega, the operator must come
// out negative (the contradiction step of the simple maximum principle).
// Hypothesis: u >= 0 outside omega.
TrialOutcome check_simple_mp(const GridFunction& u, const RegionPred& omega,
                             const KernelParams& k, const QuadratureConfig& q);

// At the negative minimum of w_lambda over omega (subset of Sigma_lambda),
// the operator difference must be negative, with I1 < 0 and I2 <= 0.
// Hypothesis: w_lambda >= 0 on Sigma_lambda \ omega.
TrialOutcome check_antisymmetric_mp(const GridFunction& u, const ReflectionFrame& frame,
                                    const RegionPred& omega, const KernelParams& k,
                                    const QuadratureConfig& q);

struct SuiteConfig {
  long trials = 1000;
  std::uint64_t seed = 42;
  // deterministic mix of 1d and 2d trials
  double h1 = 1.0 / 64.0;
  double h2 = 1.0 / 16.0;
  double frac_2d = 0.3;
};

ExperimentReport run_simple_mp_suite(const SuiteConfig& sc, const KernelParams& k,
                                     const QuadratureConfig& q);
ExperimentReport run_antisym_mp_suite(const SuiteConfig& sc, const KernelParams& k,
                                      const QuadratureConfig& q);

// Constructs the anti-symmetric trial function for a seed; exposed for tests.
struct AntisymTrial {
  GridFunction u;
  ReflectionFrame frame;
  GridFunction w;      // target w_lambda, for cross-checks
  Index omega_center;
  double omega_radius;
};
AntisymTrial make_antisym_trial(std::uint64_t seed, int dim, double h, const KernelParams& k,
                                const QuadratureConfig& q);

struct BoundarySequence {
  double lambda_o = 0;
  std::vector<double> lambdas;
  std::vector<Index> points;
  std::vector<double> deltas;
  std::vector<double> quotients;  // (1/delta_k) * operator difference at x^k
};

// Minima of w_{lambda_k} over Sigma_{lambda_k} intersected with the support
// region {u > 0} as lambda_k decreases toward lambda_o; the scaled operator
// difference at each minimizer is the paper's Hopf substitute.
// Hypothesis: w_{lambda_o} > 0 at interior nodes of that region.
BoundarySequence boundary_estimate_sequence(const GridFunction& u, double lambda_o, int k_max,
                                            const KernelParams& k, const QuadratureConfig& q,
                                            int axis = 0, int sign = +1);

}  // namespace fplap
