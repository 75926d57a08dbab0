#include "fplap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace fplap {

void QuadratureConfig::validate() const {
  if (near_cells < 1) throw std::invalid_argument("QuadratureConfig: near_cells >= 1 required");
  if (tail_radius < 0) throw std::invalid_argument("QuadratureConfig: tail_radius >= 0 required");
  if (ordering != "radius-lex")
    throw std::invalid_argument("QuadratureConfig: unknown ordering '" + ordering + "'");
}

double sphere_surface(int n) {
  const double pi = 3.14159265358979323846;
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    default: return 4.0 * pi;
  }
}

double zero_tail_integral(const KernelParams& k, double R) {
  return sphere_surface(k.n) * std::pow(R, -k.sp()) / k.sp();
}

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (m + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[m - 1 - i] = x;
    weights[i] = weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
}

namespace {

// tensor Gauss-Legendre integral of f over the n-box [lo, hi]
template <typename F>
double box_integral(int n, const double* lo, const double* hi, int m, F&& f) {
  std::vector<double> gx, gw;
  gauss_legendre(m, gx, gw);
  double total = 0.0;
  std::array<int, 3> id{0, 0, 0};
  const long count = static_cast<long>(std::pow(m, n));
  for (long c = 0; c < count; ++c) {
    long r = c;
    double w = 1.0;
    Point x{0, 0, 0};
    for (int a = 0; a < n; ++a) {
      id[a] = static_cast<int>(r % m);
      r /= m;
      const double mid = 0.5 * (lo[a] + hi[a]), rad = 0.5 * (hi[a] - lo[a]);
      x[a] = mid + rad * gx[id[a]];
      w *= rad * gw[id[a]];
    }
    total += w * f(x);
  }
  return total;
}

double kernel_pow(const Point& x, int n, double expo) {
  double r2 = 0;
  for (int a = 0; a < n; ++a) r2 += x[a] * x[a];
  return std::pow(r2, -0.5 * expo);
}

// exact kernel mass of the cell centered at lattice offset z (1D closed form)
double cell_mass_1d(long j, double h, double sp) {
  const double a = (std::labs(j) - 0.5) * h, b = (std::labs(j) + 0.5) * h;
  return (std::pow(a, -sp) - std::pow(b, -sp)) / sp;
}

double cell_mass_nd(const Index& z, int n, double h, double nsp) {
  double lo[3], hi[3];
  for (int a = 0; a < n; ++a) {
    lo[a] = z[a] * h - 0.5 * h;
    hi[a] = z[a] * h + 0.5 * h;
  }
  return box_integral(n, lo, hi, 20, [&](const Point& x) { return kernel_pow(x, n, nsp); });
}

// \int_{C0} zeta_1^2 |zeta|^{-n-sp} dzeta over the center cell (sp < 2)
double center_second_moment(int n, double h, double sp) {
  if (n == 1) return 2.0 * std::pow(0.5 * h, 2.0 - sp) / (2.0 - sp);
  // dyadic self-similar shells: m2 = S_shell / (1 - 2^{sp-2})
  const double cuts[4] = {-0.5 * h, -0.25 * h, 0.25 * h, 0.5 * h};
  double shell = 0.0;
  std::array<int, 3> c{0, 0, 0};
  const long boxes = static_cast<long>(std::pow(3, n));
  for (long b = 0; b < boxes; ++b) {
    long r = b;
    bool all_mid = true;
    double lo[3], hi[3];
    for (int a = 0; a < n; ++a) {
      c[a] = static_cast<int>(r % 3);
      r /= 3;
      if (c[a] != 1) all_mid = false;
      lo[a] = cuts[c[a]];
      hi[a] = cuts[c[a] + 1];
    }
    if (all_mid) continue;
    shell += box_integral(n, lo, hi, 16, [&](const Point& x) {
      return x[0] * x[0] * kernel_pow(x, n, n + sp);
    });
  }
  return shell / (1.0 - std::pow(2.0, sp - 2.0));
}

bool lex_positive(const Index& z, int n) {
  for (int a = 0; a < n; ++a) {
    if (z[a] > 0) return true;
    if (z[a] < 0) return false;
  }
  return false;
}

bool lex_less(const Index& a, const Index& b, int n) {
  for (int k = 0; k < n; ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

struct TableKey {
  int n;
  std::uint64_t h, s, p;
  int near_cells;
  std::uint64_t radius;
  bool operator<(const TableKey& o) const {
    return std::tie(n, h, s, p, near_cells, radius) <
           std::tie(o.n, o.h, o.s, o.p, o.near_cells, o.radius);
  }
};

std::uint64_t bits(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  return u;
}

std::unique_ptr<OffsetTable> build_table(const KernelParams& k, double h, int near_cells,
                                         double radius) {
  auto t = std::make_unique<OffsetTable>();
  const int n = k.n;
  const double sp = k.sp();
  t->n = n;
  t->h = h;
  t->radius = radius;
  const double rlim2 = (radius / h) * (radius / h) * (1.0 + 1e-12);
  t->max_cells = static_cast<int>(std::floor(radius / h + 1e-9));
  const long near2 = static_cast<long>(near_cells) * near_cells;

  if (n == 1) {
    t->tail_start = (t->max_cells + 0.5) * h;  // cell-boundary aligned, no seam
  } else {
    t->tail_start = radius;
  }
  t->tail_const = zero_tail_integral(k, t->tail_start);

  const int M = t->max_cells;
  const double hn = std::pow(h, n);
  std::vector<OffsetEntry> pairs, mid;
  Index z{0, 0, 0};
  const int lo1 = (n >= 2) ? -M : 0, hi1 = (n >= 2) ? M : 0;
  const int lo2 = (n >= 3) ? -M : 0, hi2 = (n >= 3) ? M : 0;
  for (int a = -M; a <= M; ++a) {
    for (int b = lo1; b <= hi1; ++b) {
      for (int c = lo2; c <= hi2; ++c) {
        z = {a, b, c};
        const long d2 = static_cast<long>(a) * a + static_cast<long>(b) * b +
                        static_cast<long>(c) * c;
        if (d2 == 0 || static_cast<double>(d2) > rlim2) continue;
        if (d2 <= near2) {
          if (!lex_positive(z, n)) continue;
          const double w = (n == 1) ? cell_mass_1d(a, h, sp) : cell_mass_nd(z, n, h, n + sp);
          pairs.push_back({z, w});
        } else {
          const double w = (n == 1) ? cell_mass_1d(a, h, sp)
                                    : hn * std::pow(static_cast<double>(d2) * h * h, -0.5 * (n + sp));
          mid.push_back({z, w});
        }
      }
    }
  }

  // The paired integrand vanishes quadratically at the origin. In 1D the
  // first-ring weight is adjusted so pure quadratics integrate exactly over
  // the whole near zone (cells plus the uncovered core); in higher dimensions
  // only the center-cell mass is extrapolated onto the axis ring. Both need
  // sp < 2 for the second moment to exist.
  if (sp < 2.0) {
    if (n == 1) {
      const double cut = (near_cells + 0.5) * h;
      const double m2tot = std::pow(cut, 2.0 - sp) / (2.0 - sp);
      double covered = 0;
      for (const auto& e : pairs) covered += e.w * (e.dz[0] * h) * (e.dz[0] * h);
      const double corr = (m2tot - covered) / (h * h);
      for (auto& e : pairs)
        if (e.dz[0] == 1) e.w += corr;
    } else {
      const double corr = center_second_moment(n, h, sp) / (2.0 * h * h);
      for (auto& e : pairs) {
        long d2 = 0;
        for (int a2 = 0; a2 < n; ++a2) d2 += static_cast<long>(e.dz[a2]) * e.dz[a2];
        if (d2 == 1) e.w += corr;
      }
    }
    for (const auto& e : pairs) {
      if (!(e.w > 0.0))
        throw std::logic_error("offset_table: nonpositive near-field weight");
    }
  }

  auto by_radius_desc = [n](const OffsetEntry& x, const OffsetEntry& y) {
    long dx = 0, dy = 0;
    for (int a2 = 0; a2 < n; ++a2) {
      dx += static_cast<long>(x.dz[a2]) * x.dz[a2];
      dy += static_cast<long>(y.dz[a2]) * y.dz[a2];
    }
    if (dx != dy) return dx > dy;
    return lex_less(x.dz, y.dz, n);
  };
  std::sort(pairs.begin(), pairs.end(), by_radius_desc);
  std::sort(mid.begin(), mid.end(), by_radius_desc);
  t->near_pairs = std::move(pairs);
  t->mid = std::move(mid);

  double total = 0.0;
  for (const auto& e : t->near_pairs) total += 2.0 * e.w;
  for (const auto& e : t->mid) total += e.w;
  t->sum_all = total;

  t->dense_width = 2L * M + 1;
  long dn = 1;
  for (int a2 = 0; a2 < n; ++a2) dn *= t->dense_width;
  t->dense.assign(dn, 0.0);
  auto put = [&](const Index& dz, double w) {
    long f = 0;
    for (int a2 = 0; a2 < n; ++a2) f = f * t->dense_width + (dz[a2] + M);
    t->dense[f] = w;
  };
  for (const auto& e : t->near_pairs) {
    put(e.dz, e.w);
    Index neg{0, 0, 0};
    for (int a2 = 0; a2 < n; ++a2) neg[a2] = -e.dz[a2];
    put(neg, e.w);
  }
  for (const auto& e : t->mid) put(e.dz, e.w);
  return t;
}

std::map<TableKey, std::unique_ptr<OffsetTable>> g_tables;
std::mutex g_tables_mutex;

}  // namespace

const OffsetTable& offset_table(const KernelParams& k, double h, int near_cells, double radius) {
  TableKey key{k.n, bits(h), bits(k.s), bits(k.p), near_cells, bits(radius)};
  std::lock_guard<std::mutex> lock(g_tables_mutex);
  auto it = g_tables.find(key);
  if (it == g_tables.end()) {
    it = g_tables.emplace(key, build_table(k, h, near_cells, radius)).first;
  }
  return *it->second;
}

double auto_radius_plain(const Grid& g) {
  return 2.0 * g.half_width() * std::sqrt(static_cast<double>(g.n)) + g.h;
}

double auto_radius_difference(const Grid& g) {
  return 4.0 * g.half_width() * std::sqrt(static_cast<double>(g.n)) + g.h;
}

double circumradius(const Grid& g, const Point& from) {
  const double L = g.half_width();
  double r2 = 0;
  for (int a = 0; a < g.n; ++a) {
    const double d = std::fmax(std::fabs(-L - from[a]), std::fabs(L - from[a]));
    r2 += d * d;
  }
  return std::sqrt(r2);
}

double halfspace_tail_integral(const KernelParams& k, double R, double delta) {
  if (!(delta >= 0 && delta < R))
    throw quadrature_precondition("halfspace_tail_integral: need 0 <= delta < R");
  const double sp = k.sp();
  if (k.n == 1) return std::pow(R, -sp) / sp;
  if (k.n == 3) {
    const double pi = 3.14159265358979323846;
    return 2.0 * pi * (std::pow(R, -sp) / sp - delta * std::pow(R, -1.0 - sp) / (1.0 + sp));
  }
  // n = 2: (R^{-sp}/sp) \int_0^1 2 arccos(delta tau^{1/sp} / R) dtau
  std::vector<double> gx, gw;
  gauss_legendre(24, gx, gw);
  double integral = 0.0;
  const int panels = 4;
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels, b = static_cast<double>(p + 1) / panels;
    for (int i = 0; i < 24; ++i) {
      const double tau = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
      const double c = std::fmin(1.0, delta * std::pow(tau, 1.0 / sp) / R);
      integral += 0.5 * (b - a) * gw[i] * 2.0 * std::acos(c);
    }
  }
  return std::pow(R, -sp) / sp * integral;
}

std::vector<WeightedValue> tail_nodes(const ExteriorRule& rule, const KernelParams& k,
                                      const Point& center, double tail_start) {
  const double T = zero_tail_integral(k, tail_start);
  if (rule.kind == Exterior::Zero) return {{T, 0.0}};
  if (rule.kind == Exterior::Constant) return {{T, rule.amplitude}};

  // PowerDecay: radial substitution r = R tau^{-1/sp} flattens the kernel to
  // T * dtau; fixed composite GL in tau times a fixed angular average.
  const int panels = 12, m = 8;
  std::vector<double> gx, gw;
  gauss_legendre(m, gx, gw);
  struct Dir {
    Point w;
    double eta;
  };
  std::vector<Dir> dirs;
  const double pi = 3.14159265358979323846;
  if (k.n == 1) {
    dirs.push_back({{1, 0, 0}, 0.5});
    dirs.push_back({{-1, 0, 0}, 0.5});
  } else if (k.n == 2) {
    const int na = 32;
    for (int i = 0; i < na; ++i) {
      const double th = (i + 0.5) * 2.0 * pi / na;
      dirs.push_back({{std::cos(th), std::sin(th), 0}, 1.0 / na});
    }
  } else {
    std::vector<double> mx, mw;
    gauss_legendre(12, mx, mw);
    const int nphi = 24;
    for (int i = 0; i < 12; ++i) {
      const double mu = mx[i], smu = std::sqrt(std::fmax(0.0, 1.0 - mu * mu));
      for (int j = 0; j < nphi; ++j) {
        const double ph = (j + 0.5) * 2.0 * pi / nphi;
        dirs.push_back({{smu * std::cos(ph), smu * std::sin(ph), mu}, 0.5 * mw[i] / nphi});
      }
    }
  }

  std::vector<WeightedValue> out;
  out.reserve(static_cast<size_t>(panels) * m * dirs.size());
  const double inv_sp = 1.0 / k.sp();
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels, b = static_cast<double>(p + 1) / panels;
    for (int i = 0; i < m; ++i) {
      const double tau = 0.5 * (a + b) + 0.5 * (b - a) * gx[i];
      const double wr = 0.5 * (b - a) * gw[i];
      const double r = tail_start * std::pow(tau, -inv_sp);
      for (const auto& d : dirs) {
        double r2 = 0;
        for (int aa = 0; aa < k.n; ++aa) {
          const double y = center[aa] + r * d.w[aa];
          r2 += y * y;
        }
        out.push_back({T * wr * d.eta, rule.amplitude * std::pow(r2, -0.5 * rule.alpha)});
      }
    }
  }
  return out;
}

}  // namespace fplap
