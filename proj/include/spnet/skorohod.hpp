#pragma once
#include "spnet/path.hpp"
#include "spnet/plan.hpp"

namespace spnet {

struct SPSolution {
  PiecewisePath z;  // regulated path, z = x + D y >= 0
  PiecewisePath y;  // regulator, componentwise nondecreasing from y(0-) = 0
  int sweeps = 0;
};

// Grid solution of the reflection problem for (x, D): z = x + D y with y
// minimal nondecreasing and pushing only while the pushed coordinate sits at
// zero. Requires x(0) >= 0, positive diagonal D, and a contractive coupling
// (spectral radius of |I - diag(D)^-1 D| < 1); throws NotContractiveError
// otherwise, NoConvergenceError past max_sweeps.
// d = 1 short-circuits to the running-max closed form.
SPSolution solve_sp(const PiecewisePath& x, const Mat& D, double tol = 1e-10,
                    int max_sweeps = 10000);

// Fixed-point route regardless of dimension (the d = 1 cross-check target).
SPSolution solve_sp_general(const PiecewisePath& x, const Mat& D,
                            double tol = 1e-10, int max_sweeps = 10000);

// diag(xstar) C' applied to the regulator of x under the plan's reflection
// matrix: the allocation shift whose image under Kmat is nonnegative and
// nondecreasing.
PiecewisePath gamma_bar(const StaticPlan& plan, const PiecewisePath& x,
                        double tol = 1e-10, int max_sweeps = 10000);

struct SPCheck {
  double equation_residual = 0.0;  // max |z - x - D y|
  double min_z = 0.0;              // most negative regulated value
  double max_y_decrease = 0.0;     // most negative regulator increment
  double complementarity = 0.0;    // max_i sum_k dy_i(t_k) 1{z_i(t_k) > eps}
};

SPCheck verify_sp(const PiecewisePath& x, const Mat& D, const SPSolution& sol,
                  double eps = 1e-7);

}  // namespace spnet
