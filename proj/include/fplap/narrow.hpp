#pragma once

#include <iosfwd>
#include <vector>

#include "fplap/grid.hpp"
#include "fplap/kernel.hpp"
#include "fplap/quadrature.hpp"

namespace fplap {

struct no_negative_minimum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NarrowRegionProbe {
  double lambda = 0;
  double delta = 0;  // width of Omega_lambda in the x1 direction, lambda + 1
  Index x_min{0, 0, 0};
  double w_min = 0;
  double u_at_min = 0;
  double I_value = 0;          // the nonnegative integral I of the slab estimate
  double c2_ratio = 0;         // I * delta^{sp} / u^{p-2}(x_min)
  double lower_bound = 0;      // filled by the suite once c2 is fitted
  double rhs_coefficient = 0;  // q * u^{q-1}(x_min)
  bool contradiction_holds = false;
};

// The slab integral I = \int_{Sigma_lambda} [G'(xi) + G'(eta)] / |x-y^l|^{n+sp}
// evaluated through the exact difference quotients (G(t2)-G(t1))/(t2-t1); no
// mean-value point is ever materialized. Requires p >= 2 and a profile with a
// negative w_lambda minimum inside Omega_lambda = Sigma_lambda cap B_1.
NarrowRegionProbe narrow_region_probe(const GridFunction& u, double lambda, double q_exp,
                                      const KernelParams& k, const QuadratureConfig& q);

struct NarrowRegionSuite {
  std::vector<NarrowRegionProbe> probes;
  double c2 = 0;           // min observed ratio
  double loglog_slope = 0; // slope of log I against log delta
};

// Runs the probe over a delta-halving family of constructed near-boundary
// profiles (radial profile plus a dent inside the slab).
NarrowRegionSuite run_narrow_region_suite(const std::vector<double>& deltas, double q_exp,
                                          const KernelParams& k, const QuadratureConfig& q,
                                          double h);

void write_narrow_csv(std::ostream& os, const NarrowRegionSuite& s);

}  // namespace fplap
