#pragma once

#include <string>
#include <vector>

#include "fplap/grid.hpp"
#include "fplap/kernel.hpp"

namespace fplap {

struct quadrature_precondition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
  // near zone half-width in cells; paired antipodal summation with
  // cell-exact kernel masses happens inside |z| <= near_cells * h
  int near_cells = 4;
  // node-inclusion radius for the lattice sum; 0 = automatic (box
  // circumradius bound from any evaluation point)
  double tail_radius = 0.0;
  // fixed deterministic node ordering (the only implemented order sums
  // mid-field nodes by descending |z| with lexicographic tie-break)
  std::string ordering = "radius-lex";

  void validate() const;
};

double sphere_surface(int n);  // |S^{n-1}|: 2, 2*pi, 4*pi

// \int_{|z|>R} |z|^{-n-sp} dz = sigma_{n-1} R^{-sp} / (sp)
double zero_tail_integral(const KernelParams& k, double R);

// \int_{|z|>R, z_1>delta} |z|^{-n-sp} dz for 0 <= delta < R
double halfspace_tail_integral(const KernelParams& k, double R, double delta);

// Gauss-Legendre rule on [-1, 1]
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

struct OffsetEntry {
  Index dz;
  double w;  // per-node quadrature weight (kernel mass of the node's cell)
};

// Precomputed lattice quadrature for one (n, h, s, p, near_cells, radius)
// combination. Near pairs are the lexicographically positive half of the
// near zone; their weights apply to each node of the antipodal pair and the
// axis pairs carry the center-cell correction. Mid entries cover the rest of
// the inclusion ball, sorted by descending |z| (ties lexicographic).
struct OffsetTable {
  int n = 1;
  double h = 0;
  int max_cells = 0;      // inclusion radius in index units
  double radius = 0;      // physical inclusion radius
  double tail_start = 0;  // analytic tail begins here
  double tail_const = 0;  // zero_tail_integral at tail_start
  std::vector<OffsetEntry> near_pairs;
  std::vector<OffsetEntry> mid;
  double sum_all = 0;  // total lattice weight (pairs counted twice)

  // dense per-offset weight lookup, index (dz + max_cells) per axis; 0 at origin
  std::vector<double> dense;
  long dense_width = 0;
  double dense_at(const Index& dz) const {
    long f = 0;
    for (int a = 0; a < n; ++a) f = f * dense_width + (dz[a] + max_cells);
    return dense[f];
  }
};

// Cached; safe to call concurrently.
const OffsetTable& offset_table(const KernelParams& k, double h, int near_cells, double radius);

// Automatic inclusion radii. Plain evaluation needs the tail region to clear
// the box from any interior node; difference evaluations also need it to
// clear the box as seen from the reflected node.
double auto_radius_plain(const Grid& g);
double auto_radius_difference(const Grid& g);

double circumradius(const Grid& g, const Point& from);

// The analytic tail as weighted sample values: the tail contribution to the
// operator at anchor value a is sum_j w_j * G(a - v_j). Zero/Constant rules
// collapse to a single entry; PowerDecay uses a fixed composite radial x
// angular rule (deterministic, relative error well under 1e-6).
struct WeightedValue {
  double w, v;
};
std::vector<WeightedValue> tail_nodes(const ExteriorRule& rule, const KernelParams& k,
                                      const Point& center, double tail_start);

}  // namespace fplap
