#pragma once
#include <cstdint>
#include <limits>
#include <vector>

#include "spnet/linalg.hpp"
#include "spnet/network.hpp"
#include "spnet/plan.hpp"

namespace spnet {

// Read-only view of the live simulation handed to the policy at every event.
// Q counts all jobs in the buffer, claimed counts the ones attached to an
// in-progress (possibly preempted) service, so Q - claimed jobs are free to
// start. All counters are in unscaled network time s = r^2 t.
struct SimObs {
  double s;
  double r;
  const IVec& Q;
  const IVec& claimed;
  const std::vector<char>& busy;  // per activity: has an in-progress job
  const Vec& T;                   // cumulative allocation per activity
  const IVec& E;                  // arrivals per class
  const IVec& S;                  // completions per activity
  const IMat& Phi;                // row j: jobs routed from j into each buffer
  const IVec& q0;
  const NetworkSpec& spec;
  const MaterializedNetwork& mat;
};

struct PolicyDecision {
  std::vector<int> serve;  // per server: activity index, -1 = idle
  double until = std::numeric_limits<double>::infinity();  // next declared boundary
};

// Called at t = 0 and after every event (arrival, completion, declared
// boundary). Must assign each server one of its own activities or -1; asking
// for an empty buffer raises PolicyInfeasibleError in the driver.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyDecision decide(const SimObs& obs) = 0;
  virtual const char* name() const { return "policy"; }
};

// Serves the lowest-index activity whose buffer has a resumable or free job.
class WorkConservingPolicy : public Policy {
 public:
  PolicyDecision decide(const SimObs& obs) override;
  const char* name() const override { return "work-conserving"; }
};

// Constant piece of the event history: queue vector and allocation bitmask
// on [s0, s1). Enough to integrate any discounted linear cost exactly.
struct TraceSegment {
  double s0 = 0.0, s1 = 0.0;
  IVec q;
  std::uint64_t alloc = 0;  // bit j set = activity j allocated
};

struct SimChecks {
  long long max_identity_residual = 0;  // flow-balance residual, exact integers
  double max_idle_decrease = 0.0;       // most negative idleness increment
  double idle_identity_residual = 0.0;  // max |I_k - (s - sum_j A_kj T_j)|
  long long contention_idles = 0;       // serve requests lost to claimed jobs
  long long policy_calls = 0;
};

struct SimTrace {
  double r = 0.0;
  double t_max = 0.0;  // scaled horizon; unscaled horizon is r^2 t_max
  long long event_count = 0;
  IVec q0;
  std::vector<double> t_grid;  // scaled sample times
  std::vector<IVec> Q_samples;
  std::vector<Vec> T_samples;
  std::vector<IVec> E_samples;
  std::vector<IVec> S_samples;
  std::vector<Vec> I_samples;  // per-server cumulative idleness
  std::vector<TraceSegment> segments;
  SimChecks checks;
};

// Event-driven run under preemptive-resume allocation, one activity per
// server at a time. Arrival, service, and routing draws come from separate
// substreams of `seed`; reruns are bit-identical. Throws PolicyInfeasibleError
// on contract violations by the policy.
SimTrace run(const NetworkSpec& spec, const MaterializedNetwork& mat,
             Policy& policy, double t_max, std::uint64_t seed,
             int out_points = 201);

struct SimCost {
  double total = 0.0;
  double holding = 0.0;
  double pushing = 0.0;
  double tail = 0.0;  // crude discounted post-horizon estimate
};

// Discounted cost of a trace in diffusion scale: holding h . Q^(t) integrated
// exactly over the piecewise-constant segments, pushing p . dU^ summed from
// the piecewise-linear allocation shortfall. Time and state are scaled by
// 1/r^2 and 1/r before discounting.
SimCost sim_cost(const SimTrace& trace, const StaticPlan& plan,
                 const Vec& h, const Vec& p, double gamma);

struct ScaledViews {
  std::vector<double> t;  // scaled times
  Mat Qhat, Qbar;         // rows = grid points
  Mat Tbar, Yhat, Uhat;
  Mat Ehat, Shat;
  Mat What;
  Mat Ihat;  // scaled idleness per server
};

// Fluid and diffusion scalings of the sampled counters. Centerings use the
// materialized rates, the plan's nominal allocation and workload map.
ScaledViews scale_views(const SimTrace& trace, const StaticPlan& plan,
                        const MaterializedNetwork& mat);

// Diffusion-scaled centered netput reconstructed from the live counters; the
// quantity review policies sample in place of the limiting free process.
// Component i: q0/r + centered arrivals - routing-adjusted centered service.
Vec diffusion_netput(const SimObs& obs);

}  // namespace spnet
