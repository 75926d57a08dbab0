#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fplap/operator.hpp"
#include "fplap/parallel.hpp"
#include "fplap/rng.hpp"
#include "oracle.hpp"

using namespace fplap;

namespace {

GridFunction profile_1d(const Grid& g, double s) {
  GridFunction u(g, ExteriorRule::zero());
  for (long f = 0; f < g.node_count(); ++f) {
    const double x = g.unflat(f)[0] * g.h;
    u.values[f] = x * x < 1.0 ? std::pow(1.0 - x * x, s) : 0.0;
  }
  return u;
}

}  // namespace

TEST_CASE("oracle reproduces the Gamma-function constant") {
  for (double s : {0.3, 0.5, 0.7}) {
    auto u = [s](double x) { return x * x < 1.0 ? std::pow(1.0 - x * x, s) : 0.0; };
    const double ref = oracle::profile_constant(1, s);
    for (double x : {0.0, 0.3, -0.62, 0.88}) {
      const double got = oracle::frac_laplacian_1d(u, x, s);
      CHECK(got == doctest::Approx(ref).epsilon(2e-4));
    }
  }
  // s = 1/2 in 1D gives exactly pi
  CHECK(oracle::profile_constant(1, 0.5) == doctest::Approx(3.14159265358979).epsilon(1e-12));
}

TEST_CASE("zero-exterior tail closed form") {
  // n=1, s=0.5, p=2: \int_{|z|>2} |z|^{-2} dz = 1
  const KernelParams k(1, 0.5, 2.0);
  CHECK(zero_tail_integral(k, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  const auto nodes = tail_nodes(ExteriorRule::zero(), k, {0, 0, 0}, 2.0);
  REQUIRE(nodes.size() == 1);
  CHECK(nodes[0].w == doctest::Approx(1.0));
  CHECK(nodes[0].v == 0.0);
}

TEST_CASE("constant function evaluates to zero") {
  for (int n : {1, 2}) {
    const double h = n == 1 ? 1.0 / 64 : 1.0 / 16;
    Grid g(n, h, n == 1 ? 80 : 20);
    GridFunction u(g, ExteriorRule::constant(0.7));
    for (auto& v : u.values) v = 0.7;
    const KernelParams k(n, 0.5, 2.5);
    const QuadratureConfig q;
    for (const Index& x : {Index{0, 0, 0}, Index{3, n > 1 ? -2 : 0, 0}}) {
      CHECK(std::fabs(frac_p_laplacian(u, x, k, q)) <= 1e-12 * 0.7);
    }
  }
}

TEST_CASE("odd function vanishes at the origin") {
  Grid g(1, 1.0 / 64, 96);
  GridFunction u(g, ExteriorRule::zero());
  for (long f = 0; f < g.node_count(); ++f) {
    const double x = g.unflat(f)[0] * g.h;
    u.values[f] = x * x < 1.0 ? x * (1.0 - x * x) : 0.0;
  }
  for (double p : {2.0, 3.0}) {
    const KernelParams k(1, 0.5, p);
    CHECK(std::fabs(frac_p_laplacian(u, {0, 0, 0}, k, QuadratureConfig{})) <= 1e-10);
  }
}

TEST_CASE("homogeneity of degree p-1") {
  Grid g(1, 1.0 / 64, 80);
  GridFunction u = profile_1d(g, 0.6);
  Rng rng(5);
  for (double p : {2.0, 2.5, 3.0}) {
    const KernelParams k(1, 0.4, p);
    const QuadratureConfig q;
    const double alpha = rng.uniform(0.3, 3.0);
    GridFunction ua = u;
    for (auto& v : ua.values) v *= alpha;
    for (const Index& x : {Index{0, 0, 0}, Index{17, 0, 0}}) {
      const double base = frac_p_laplacian(u, x, k, q);
      const double scaled = frac_p_laplacian(ua, x, k, q);
      CHECK(scaled ==
            doctest::Approx(std::pow(alpha, p - 1.0) * base).epsilon(1e-10));
    }
  }
}

TEST_CASE("p=2 additivity to roundoff") {
  Grid g(1, 1.0 / 64, 80);
  GridFunction u = profile_1d(g, 0.5);
  GridFunction v(g, ExteriorRule::zero());
  Rng rng(9);
  for (long f = 0; f < g.node_count(); ++f) {
    const double x = g.unflat(f)[0] * g.h;
    v.values[f] = x * x < 0.81 ? std::cos(3.0 * x) * (0.81 - x * x) : 0.0;
  }
  GridFunction sum = u;
  for (long f = 0; f < g.node_count(); ++f) sum.values[f] += v.values[f];
  const KernelParams k(1, 0.5, 2.0);
  const QuadratureConfig q;
  for (const Index& x : {Index{0, 0, 0}, Index{-23, 0, 0}, Index{40, 0, 0}}) {
    const double a = frac_p_laplacian(u, x, k, q);
    const double b = frac_p_laplacian(v, x, k, q);
    const double c = frac_p_laplacian(sum, x, k, q);
    CHECK(c == doctest::Approx(a + b).epsilon(1e-13));
  }
}

TEST_CASE("translation equivariance is bit-exact") {
  Grid g(1, 1.0 / 32, 96);  // plenty of slack around the support
  const KernelParams k(1, 0.5, 3.0);
  const QuadratureConfig q;
  GridFunction u(g, ExteriorRule::zero());
  for (long f = 0; f < g.node_count(); ++f) {
    const double x = g.unflat(f)[0] * g.h;
    u.values[f] = x * x < 0.25 ? (0.25 - x * x) * (0.25 - x * x) : 0.0;
  }
  GridFunction ut(g, ExteriorRule::zero());
  const int shift = 11;
  for (long f = 0; f < g.node_count(); ++f) {
    const Index i = g.unflat(f);
    const Index j{i[0] - shift, 0, 0};
    ut.values[f] = g.inside(j) ? u.values[g.flat(j)] : 0.0;
  }
  for (int base : {-8, 0, 5}) {
    const double a = frac_p_laplacian(u, {base, 0, 0}, k, q);
    const double b = frac_p_laplacian(ut, {base + shift, 0, 0}, k, q);
    CHECK(a == b);  // identical summands in identical order
  }
}

TEST_CASE("reflection covariance to roundoff") {
  Grid g(1, 1.0 / 32, 48);
  const KernelParams k(1, 0.5, 3.0);
  const QuadratureConfig q;
  GridFunction u(g, ExteriorRule::zero());
  Rng rng(31);
  for (long f = 0; f < g.node_count(); ++f) {
    const double x = g.unflat(f)[0] * g.h;
    u.values[f] = x * x < 1.0 ? (1.0 - x * x) * (1.2 + std::sin(2.0 * x)) : 0.0;
  }
  const ReflectionFrame fr = ReflectionFrame::from_half_steps(0, +1, 0, g);
  GridFunction ur(g, ExteriorRule::zero());
  for (long f = 0; f < g.node_count(); ++f) {
    const Index i = g.unflat(f);
    ur.values[f] = u.at(fr.reflect(i));
  }
  for (int base : {-20, -3, 14}) {
    const double a = frac_p_laplacian(u, {base, 0, 0}, k, q);
    const double b = frac_p_laplacian(ur, {-base, 0, 0}, k, q);
    CHECK(b == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("oracle equivalence: p=2 profile against adaptive quadrature") {
  const double h = 1.0 / 128;
  Grid g = make_ball_grid(1, h);
  const QuadratureConfig q;
  for (double s : {0.3, 0.5, 0.7}) {
    GridFunction u = profile_1d(g, s);
    const KernelParams k(1, s, 2.0);
    auto uf = [s](double x) { return x * x < 1.0 ? std::pow(1.0 - x * x, s) : 0.0; };
    std::vector<Index> xs;
    for (int i = -115; i <= 115; i += 5) xs.push_back({i, 0, 0});
    const auto vals = evaluate_field(u, xs, k, q);
    double worst = 0;
    for (size_t j = 0; j < xs.size(); ++j) {
      const double x = xs[j][0] * h;
      const double ref = oracle::frac_laplacian_1d(uf, x, s);
      worst = std::fmax(worst, std::fabs(vals[j].value - ref) / std::fabs(ref));
    }
    CAPTURE(s);
    CHECK(worst <= 0.02);
  }
}

TEST_CASE("near-boundary evaluation is rejected") {
  Grid g(1, 1.0 / 16, 20);
  GridFunction u(g, ExteriorRule::zero());
  const KernelParams k(1, 0.5, 2.0);
  CHECK_THROWS_AS(frac_p_laplacian(u, {18, 0, 0}, k, QuadratureConfig{}),
                  quadrature_precondition);
  CHECK_NOTHROW(frac_p_laplacian(u, {16, 0, 0}, k, QuadratureConfig{}));
}

TEST_CASE("field evaluation identical across worker counts") {
  Grid g(2, 1.0 / 8, 12);
  GridFunction u(g, ExteriorRule::zero());
  Rng rng(77);
  for (auto& v : u.values) v = rng.uniform(-1.0, 1.0);
  for (long f = 0; f < g.node_count(); ++f) {
    const Index i = g.unflat(f);
    if (!(g.radius2(i) < 1.0)) u.values[f] = 0.0;
  }
  const KernelParams k(2, 0.5, 3.0);
  const QuadratureConfig q;
  const auto xs = interior_nodes(g, 4);
  set_workers(1);
  const auto serial = evaluate_field(u, xs, k, q);
  set_workers(4);
  const auto par = evaluate_field(u, xs, k, q);
  set_workers(0);
  REQUIRE(serial.size() == par.size());
  for (size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].value == par[i].value);
}
