#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spnet/control.hpp"
#include "spnet/plan.hpp"
#include "spnet/simulate.hpp"

namespace spnet {

// Review-policy parameters. Per scale r the policy slices time into
// subintervals of delta = r^kappa_exp, gates service on I2 stretches behind a
// safety stock of d1 r^kappa_exp jobs, and realizes each review jump over a
// stretch of r rho network time units after the epoch.
struct TrackingParams {
  double kappa_exp = 0.6;
  double m_exp = 6.0;  // moment exponent of the primitives
  double d1 = 0.0;
  double rho = 1.0;
  JumpRuleControl rule;
};

struct ParamReport {
  bool kappa_ok = false;
  double kappa_margin = 0.0;  // kappa (1 + m) - 3
  bool d1_ok = false;
  double d1_margin = 0.0;     // d1 - max beta - 1
  bool stretch_ok = false;    // advisory: rho min basic x* vs M (lip + 1)
  double stretch_margin = 0.0;
  bool epoch_ok = false;
  double epoch_margin = 0.0;  // r theta_g - rho
  std::vector<std::string> findings;

  bool hard_ok() const { return kappa_ok && d1_ok && epoch_ok; }
};

// Checks the parameter inequalities the policy construction needs. The
// stretch check uses an empirical displacement Lipschitz estimate and only
// warns; the exponent, safety coefficient, and epoch-length checks are hard.
ParamReport validate_params(const TrackingParams& params, double r,
                            const StaticPlan& plan, double lip_estimate);

struct Slot {
  int activity = -1;
  double lo = 0.0, hi = 0.0;  // offsets within one delta subinterval
};

// Per-epoch slot layout. Phase 1 subintervals (the jump stretch) hold back
// nu_j / rho of each activity's nominal share; phase 2 subintervals allocate
// the nominal share exactly. Slots run in ascending activity order per server.
struct SlotSchedule {
  double a = 0.0, b = 0.0;  // epoch start, stretch end (unscaled time)
  double delta = 0.0;
  int m1 = 0, m2 = 0;  // full subintervals in each phase
  std::vector<std::vector<Slot>> phase1;  // per server
  std::vector<std::vector<Slot>> phase2;
  int clamped = 0;  // slot lengths truncated at 0 or at the subinterval end
};

SlotSchedule build_slots(const StaticPlan& plan, const TrackingParams& params,
                         double r, int epoch, const Vec& nu);

// The tracking policy: samples the scaled netput on the kappa_s grid, draws
// the review jump at each epoch, spreads it over the stretch via modified
// slot lengths, and serves gated slots elsewhere. Gates: the buffer must be
// nonempty now, and on phase 2 its count frozen at the subinterval start must
// exceed the safety stock.
class TrackingPolicy : public Policy {
 public:
  TrackingPolicy(const StaticPlan& plan, const TrackingParams& params, double r,
                 std::uint64_t seed);

  PolicyDecision decide(const SimObs& obs) override;
  const char* name() const override { return "tracking"; }

  double safety_stock() const { return theta_big_; }
  const Vec& current_nu() const { return nu_; }
  const SlotSchedule& current_schedule() const { return sched_; }
  int current_epoch() const { return epoch_; }
  long long clamped_slots() const { return clamped_total_; }
  const std::vector<Vec>& netput_samples() const { return samples_; }

 private:
  void advance_epochs(const SimObs& obs);

  const StaticPlan& plan_;
  TrackingParams params_;
  double r_;
  double delta_;
  double theta_big_;
  double r2tg_;   // unscaled epoch stride r^2 theta_g
  double ssr2_;   // unscaled sample stride kappa_s r^2
  int max_samples_;
  RngStream rng_;
  bool started_ = false;
  Vec qhat0_;
  int epoch_ = 0;
  Vec nu_;
  SlotSchedule sched_;
  std::vector<Vec> samples_;
  int next_sample_ = 1;
  long long snap_key_ = -1;  // epoch * 2^32 + subinterval of the held snapshot
  IVec snap_q_;
  long long clamped_total_ = 0;
};

// Validates the parameters for this r (throws InvalidParamsError naming the
// violated inequality) and builds the policy.
std::unique_ptr<TrackingPolicy> make_policy(const StaticPlan& plan,
                                            const TrackingParams& params,
                                            double r, std::uint64_t seed);

}  // namespace spnet
