#include "fplap/kernel.hpp"

#include <cmath>
#include <limits>

namespace fplap {

KernelParams::KernelParams(int n_, double s_, double p_, double C_)
    : n(n_), s(s_), p(p_), C(C_) {
  if (n < 1 || n > 3) throw std::invalid_argument("KernelParams: n must be 1, 2 or 3");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("KernelParams: need 0 < s < 1");
  if (!(p > 1.0)) throw std::invalid_argument("KernelParams: need p > 1");
  if (!(C > 0.0)) throw std::invalid_argument("KernelParams: need C > 0");
  if (p < 2.0 && !(s < 2.0 * (p - 1.0) / p)) {
    throw invalid_regime(
        "InvalidRegime: for 1 < p < 2 the paired near-field quadrature requires "
        "s < 2(p-1)/p; got s = " + std::to_string(s) + ", p = " + std::to_string(p));
  }
}

SignedPower::SignedPower(double p) : pm1(p - 1.0), special(0) {
  if (p == 2.0) special = 2;
  else if (p == 3.0) special = 3;
  else if (p == 4.0) special = 4;
}

double SignedPower::operator()(double t) const {
  switch (special) {
    case 2: return t;
    case 3: return t * std::fabs(t);
    case 4: return t * t * t;
    default: return std::copysign(std::pow(std::fabs(t), pm1), t);
  }
}

double g_apply(double t, const KernelParams& k) { return SignedPower(k.p)(t); }

double g_prime(double t, const KernelParams& k) {
  if (k.p == 2.0) return 1.0;
  if (t == 0.0) {
    if (k.p > 2.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return (k.p - 1.0) * std::pow(std::fabs(t), k.p - 2.0);
}

double mean_value_xi(double t1, double t2, const KernelParams& k) {
  if (t1 == t2) throw degenerate_interval("mean_value_xi: t1 == t2");
  if (k.p == 2.0) throw xi_indeterminate("mean_value_xi: xi is indeterminate for p = 2");
  const SignedPower g(k.p);
  const double slope = (g(t2) - g(t1)) / (t2 - t1);
  // (p-1)|xi|^{p-2} = slope
  return std::pow(slope / (k.p - 1.0), 1.0 / (k.p - 2.0));
}

namespace {

// golden-ratio additive recurrence; fills (0,1) with low discrepancy
inline double frac_golden(long j) {
  const double inv_phi = 0.6180339887498949;
  double v = (static_cast<double>(j) + 0.5) * inv_phi;
  return v - std::floor(v);
}

double ratio_infimum(const KernelParams& k, long samples) {
  if (samples < 1000) throw std::invalid_argument("lemma_constant: need samples >= 1000");
  const double two_pi = 6.283185307179586476925286766559;
  double inf = std::numeric_limits<double>::infinity();
  for (long j = 0; j < samples; ++j) {
    const double theta = two_pi * frac_golden(j);
    double t1 = std::cos(theta), t2 = std::sin(theta);
    const double m = std::fmax(std::fabs(t1), std::fabs(t2));
    t1 /= m;
    t2 /= m;
    if (std::fabs(t1 - t2) < 1e-12) continue;
    const double xi = mean_value_xi(t1, t2, k);
    const double r = xi / std::fmax(std::fabs(t1), std::fabs(t2));
    if (r < inf) inf = r;
  }
  return inf;
}

}  // namespace

double lemma_constant(const KernelParams& k, long samples) {
  if (k.p <= 2.0)
    throw unsupported_exponent("lemma_constant: stated for p > 2 only (see lemma_ratio_infimum_unchecked)");
  return ratio_infimum(k, samples);
}

double lemma_ratio_infimum_unchecked(const KernelParams& k, long samples) {
  return ratio_infimum(k, samples);
}

}  // namespace fplap
