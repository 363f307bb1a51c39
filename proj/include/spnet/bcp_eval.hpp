#pragma once
#include <cstdint>

#include "spnet/control.hpp"
#include "spnet/linalg.hpp"
#include "spnet/path.hpp"
#include "spnet/plan.hpp"

namespace spnet {

struct CostParams {
  Vec h;                // holding cost rates, dim I
  Vec p;                // pushing cost on the idleness/unused coordinates, dim N
  double gamma = 1.0;   // discount rate
};

struct BCPCostEstimate {
  double mean = 0.0;
  double se = 0.0;           // sample sd / sqrt(reps)
  int reps = 0;
  double tail_bound = 0.0;   // discounted post-horizon estimate
  double mean_holding = 0.0;
  double mean_pushing = 0.0;
};

// Monte Carlo cost of the jump-rule control: per replication, one driving
// path, one controlled path, discounted holding integral (trapezoid on the
// non-synthetic nodes) plus the discounted Stieltjes sum of the pushing term
// over every increment, review-epoch jumps included. In one dimension the
// driving paths carry exact within-step minima so reflection has no grid bias
// at the quadrature nodes. Deterministic in (seed, reps).
BCPCostEstimate evaluate_bcp_cost(const StaticPlan& plan,
                                  const JumpRuleControl& rule, const Vec& q,
                                  const CostParams& cost, double dt,
                                  double horizon, int reps, std::uint64_t seed,
                                  const BuildOptions& opt = BuildOptions());

struct EffectiveCost {
  double value = 0.0;
  Vec minimizer;  // a cheapest queue configuration with this workload
};

// Cheapest holding cost over queue states with workload w: min h.q subject to
// Lambda q = w, q >= 0. For |w| > 1 the minimizer is taken positively
// homogeneous: |w| times the minimizer at w/|w|. Throws
// InfeasibleWorkloadError when w is not a workload of any nonnegative state.
EffectiveCost effective_cost(const StaticPlan& plan, const Vec& h,
                             const Vec& w);

// Workload-space cost of a control: quadrature of the discounted effective
// cost along W plus the discounted pushing sum along U. The two paths may
// live on different grids. Throws StateConstraintError when some W(t) is not
// a feasible workload, InvalidParamsError when U decreases.
double evaluate_ewf_cost(const StaticPlan& plan, const Vec& h, const Vec& p,
                         const PiecewisePath& U, const PiecewisePath& W,
                         double gamma);

}  // namespace spnet
