#include "fplap/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "fplap/io.hpp"
#include "fplap/parallel.hpp"

namespace fplap {

ScanResult moving_plane_scan(const GridFunction& u, int axis, int sign, double tol_rel) {
  const Grid& g = u.grid;
  if (axis < 0 || axis >= g.n) throw std::invalid_argument("moving_plane_scan: bad axis");
  const double tol = tol_rel * std::fmax(u.max_abs(), 1e-300);

  // half-step plane positions for which Sigma_lambda meets the box
  const long m_lo = -2L * g.extent + 1;
  const long m_hi = 2L * g.extent - 1;
  const long count = m_hi - m_lo + 1;
  std::vector<double> mins(count);
  parallel_for(count, [&](long idx) {
    const ReflectionFrame fr = ReflectionFrame::from_half_steps(axis, sign, m_lo + idx, g);
    double mn = std::numeric_limits<double>::infinity();
    const long total = g.node_count();
    for (long f = 0; f < total; ++f) {
      const Index i = g.unflat(f);
      if (fr.side(i) != -1) continue;
      const double w = u.at(fr.reflect(i)) - u.values[f];
      if (w < mn) mn = w;
    }
    mins[idx] = mn;
  });

  ScanResult out;
  out.curve.reserve(count);
  long first_fail = count;
  for (long idx = 0; idx < count; ++idx) {
    const double lam = static_cast<double>(m_lo + idx) * (0.5 * g.h);
    out.curve.push_back({lam, mins[idx]});
    if (first_fail == count && mins[idx] < -tol) first_fail = idx;
  }
  const long last_ok = first_fail - 1;
  out.lambda0 = static_cast<double>(m_lo + (last_ok < 0 ? 0 : last_ok)) * (0.5 * g.h);
  if (last_ok < 0) out.lambda0 = static_cast<double>(m_lo - 1) * (0.5 * g.h);
  return out;
}

namespace {

Index argmax_node(const GridFunction& u) {
  const long total = u.grid.node_count();
  long best = 0;
  for (long f = 1; f < total; ++f)
    if (u.values[f] > u.values[best]) best = f;
  return u.grid.unflat(best);
}

}  // namespace

SymmetryReport symmetry_report(const GridFunction& u, const Index& center) {
  SymmetryReport rep;
  rep.center = center;
  const Grid& g = u.grid;
  const double umax = std::fmax(u.max_value(), 1e-300);
  rep.max_value = u.max_value();

  // exact lattice radius classes keyed by integer squared distance
  std::map<long, std::pair<double, long>> classes;
  const long total = g.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    const long r2 = Grid::index_dist2(i, center, g.n);
    auto& [sum, cnt] = classes[r2];
    sum += u.values[f];
    ++cnt;
  }
  std::map<long, double> mean;
  for (const auto& [r2, sc] : classes) mean[r2] = sc.first / sc.second;

  double asym = 0;
  for (long f = 0; f < total; ++f) {
    const Index i = g.unflat(f);
    const long r2 = Grid::index_dist2(i, center, g.n);
    asym = std::fmax(asym, std::fabs(u.values[f] - mean[r2]));
  }
  rep.asymmetry = asym / umax;

  const double mono_tol = rep.mono_tol_rel * umax;
  long viol = 0;
  double prev = 0;
  bool first = true;
  for (const auto& [r2, m] : mean) {
    if (!first && m > prev + mono_tol) ++viol;
    prev = m;
    first = false;
  }
  rep.monotonicity_violations = viol;

  for (int axis = 0; axis < g.n; ++axis) {
    for (int sign : {+1, -1}) {
      const ScanResult sc = moving_plane_scan(u, axis, sign);
      rep.lambda0.push_back({axis, sign, sc.lambda0});
    }
  }
  return rep;
}

SymmetryReport symmetry_report(const GridFunction& u) {
  return symmetry_report(u, argmax_node(u));
}

void write_symmetry_json(std::ostream& os, const SymmetryReport& r) {
  os << "{\"center\":[" << r.center[0] << ',' << r.center[1] << ',' << r.center[2]
     << "],\"max_value\":" << fmt17(r.max_value) << ",\"asymmetry\":" << fmt17(r.asymmetry)
     << ",\"monotonicity_violations\":" << r.monotonicity_violations
     << ",\"mono_tol_rel\":" << fmt17(r.mono_tol_rel) << ",\"lambda0\":[";
  for (size_t i = 0; i < r.lambda0.size(); ++i) {
    if (i) os << ',';
    os << "{\"axis\":" << r.lambda0[i].axis << ",\"sign\":" << r.lambda0[i].sign
       << ",\"lambda0\":" << fmt17(r.lambda0[i].lambda0) << '}';
  }
  os << "]}\n";
}

void write_scan_csv(std::ostream& os, const ScanResult& r) {
  os << "lambda,min_w\n";
  for (const auto& p : r.curve) os << fmt17(p.lambda) << ',' << fmt17(p.min_w) << '\n';
}

}  // namespace fplap
