#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "fplap/grid.hpp"

namespace fplap {

struct DirectionLambda {
  int axis = 0;
  int sign = +1;
  double lambda0 = 0;
};

struct SymmetryReport {
  Index center{0, 0, 0};
  double max_value = 0;
  // max over nodes of |u - radial class average| / max u; classes are exact
  // lattice distances from the center, so truly radial data scores 0
  double asymmetry = 0;
  long monotonicity_violations = 0;
  double mono_tol_rel = 1e-3;
  std::vector<DirectionLambda> lambda0;
};

struct ScanPoint {
  double lambda;
  double min_w;
};

struct ScanResult {
  double lambda0 = 0;
  std::vector<ScanPoint> curve;
};

// Sweeps half-lattice planes from the box edge across the box, recording
// m(lambda) = min over Sigma_lambda of w_lambda; lambda0 is the largest
// lambda such that all m up to it stay above -tol, tol = tol_rel * max u.
ScanResult moving_plane_scan(const GridFunction& u, int axis, int sign, double tol_rel = 1e-8);

SymmetryReport symmetry_report(const GridFunction& u);
SymmetryReport symmetry_report(const GridFunction& u, const Index& center);

void write_symmetry_json(std::ostream& os, const SymmetryReport& r);
void write_scan_csv(std::ostream& os, const ScanResult& r);

}  // namespace fplap
