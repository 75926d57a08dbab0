#pragma once

#include <stdexcept>
#include <string>

namespace fplap {

struct invalid_regime : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct degenerate_interval : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct xi_indeterminate : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct unsupported_exponent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameters (n, s, p, C) of the nonlocal kernel
//   C * PV \int G(u(x)-u(y)) / |x-y|^{n+sp} dy,   G(t) = |t|^{p-2} t.
//
// C defaults to 1: every check in this toolkit is a sign or ratio statement,
// invariant under positive rescaling of C.
struct KernelParams {
  int n = 1;
  double s = 0.5;
  double p = 2.0;
  double C = 1.0;

  KernelParams(int n_, double s_, double p_, double C_ = 1.0);

  // 1 < p < 2 (G' blows up at 0); p > 2 is the degenerate regime (G'(0) = 0).
  bool singular_regime() const { return p < 2.0; }
  double sp() const { return s * p; }
};

// G(t) = |t|^{p-2} t = sign(t) |t|^{p-1}, with fast paths for integer p.
struct SignedPower {
  double pm1;    // p - 1
  int special;   // 2, 3, 4 when p is one of those, else 0

  explicit SignedPower(double p);
  double operator()(double t) const;
};

double g_apply(double t, const KernelParams& k);

// G'(t) = (p-1)|t|^{p-2}. Returns +infinity at t = 0 when 1 < p < 2; that is a
// valid value, not an error.
double g_prime(double t, const KernelParams& k);

// The magnitude |xi| with G(t2) - G(t1) = G'(xi) (t2 - t1).
// Throws degenerate_interval if t1 == t2 and xi_indeterminate if p == 2.
double mean_value_xi(double t1, double t2, const KernelParams& k);

// Infimum of |xi| / max{|t1|, |t2|} over a deterministic low-discrepancy set
// of pairs normalized to max{|t1|, |t2|} = 1. Requires p > 2 and
// samples >= 1000.
double lemma_constant(const KernelParams& k, long samples);

// Same scan without the p > 2 restriction. Reported as a diagnostic only; no
// positivity claim is made for p <= 2.
double lemma_ratio_infimum_unchecked(const KernelParams& k, long samples);

}  // namespace fplap
