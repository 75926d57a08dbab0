#pragma once

#include <vector>

#include "fplap/grid.hpp"
#include "fplap/kernel.hpp"
#include "fplap/quadrature.hpp"

namespace fplap {

struct EvalBreakdown {
  double value = 0, near = 0, mid = 0, tail = 0;
};

// C * [ paired near-field + mid-field lattice sum + analytic tail ] at the
// lattice node x. Preconditions: x at least near_cells inside the box; the
// tail region must clear the box (automatic radius guarantees it).
EvalBreakdown frac_p_laplacian_detail(const GridFunction& u, const Index& x,
                                      const KernelParams& k, const QuadratureConfig& q);
double frac_p_laplacian(const GridFunction& u, const Index& x, const KernelParams& k,
                        const QuadratureConfig& q);

// Parallel evaluation at many nodes; bit-identical for any worker count.
std::vector<EvalBreakdown> evaluate_field(const GridFunction& u, const std::vector<Index>& xs,
                                          const KernelParams& k, const QuadratureConfig& q);

// All box nodes at least near_cells from the box faces, in flat (lex) order.
std::vector<Index> interior_nodes(const Grid& g, int margin_cells);

// (-Delta)_p^s u_lambda(x) - (-Delta)_p^s u(x), both sides over the same
// offset table (inclusion radius auto_radius_difference unless overridden).
double operator_difference_direct(const GridFunction& u, const ReflectionFrame& frame,
                                  const Index& x, const KernelParams& k,
                                  const QuadratureConfig& q);

struct DecompositionResult {
  double I1 = 0, I2 = 0;
  double direct = 0;       // difference computed without decomposition
  double C_times_sum = 0;  // C * (I1 + I2)
};

// The half-space split of the operator difference: I1 carries the kernel
// difference against the w-bracket, I2 the regrouped G-differences against
// the reflected kernel. Requires x strictly in Sigma_lambda and a Zero or
// Constant exterior. Shares its node set with the direct route, so the two
// agree up to roundoff.
DecompositionResult operator_difference_decomposed(const GridFunction& u,
                                                   const ReflectionFrame& frame, const Index& x,
                                                   const KernelParams& k,
                                                   const QuadratureConfig& q);

}  // namespace fplap
