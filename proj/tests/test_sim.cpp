#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "spnet/simulate.hpp"

using namespace spnet;
using namespace spnet::testing;

namespace {

struct FixedPolicy : Policy {
  std::vector<int> serve;
  PolicyDecision decide(const SimObs&) override {
    PolicyDecision d;
    d.serve = serve;
    return d;
  }
};

}  // namespace

TEST_CASE("flow identities hold exactly event by event") {
  auto plan = example_plan("tandem");
  auto mat = materialize(plan.spec, plan.scaling, 5.0);
  WorkConservingPolicy pol;
  auto trace = run(plan.spec, mat, pol, 2.0, 42);
  CHECK(trace.event_count > 50);
  CHECK(trace.checks.max_identity_residual == 0);
  CHECK(trace.checks.idle_identity_residual < 1e-6);
  CHECK(trace.checks.max_idle_decrease <= 0.0);
  CHECK(trace.q0(0) == 5);
  CHECK(trace.q0(1) == 5);
}

TEST_CASE("reruns with the same seed are bit-identical") {
  auto plan = example_plan("tandem");
  auto mat = materialize(plan.spec, plan.scaling, 8.0);
  WorkConservingPolicy p1, p2;
  auto a = run(plan.spec, mat, p1, 1.0, 7);
  auto b = run(plan.spec, mat, p2, 1.0, 7);
  CHECK(a.event_count == b.event_count);
  REQUIRE(a.Q_samples.size() == b.Q_samples.size());
  for (size_t k = 0; k < a.Q_samples.size(); ++k) {
    CHECK(a.Q_samples[k] == b.Q_samples[k]);
    CHECK(a.T_samples[k] == b.T_samples[k]);
  }
  auto c = run(plan.spec, mat, p1, 1.0, 8);
  CHECK(a.event_count != c.event_count);
}

TEST_CASE("segments tile the horizon and integrate to the allocations") {
  auto plan = example_plan("single");
  auto mat = materialize(plan.spec, plan.scaling, 6.0);
  WorkConservingPolicy pol;
  auto trace = run(plan.spec, mat, pol, 1.0, 19);
  REQUIRE_FALSE(trace.segments.empty());
  CHECK(trace.segments.front().s0 == 0.0);
  CHECK(trace.segments.back().s1 == doctest::Approx(36.0));
  double t_alloc = 0.0;
  for (size_t k = 0; k < trace.segments.size(); ++k) {
    if (k) CHECK(trace.segments[k].s0 == doctest::Approx(trace.segments[k - 1].s1));
    if (trace.segments[k].alloc & 1) {
      t_alloc += trace.segments[k].s1 - trace.segments[k].s0;
    }
  }
  CHECK(t_alloc == doctest::Approx(trace.T_samples.back()(0)).epsilon(1e-9));
}

TEST_CASE("policy contract violations are reported") {
  auto plan = example_plan("tandem");
  auto mat = materialize(plan.spec, plan.scaling, 4.0);

  // serving another server's activity
  FixedPolicy cross;
  cross.serve = {1, 0};
  CHECK_THROWS_AS(run(plan.spec, mat, cross, 0.5, 1), PolicyInfeasibleError);

  // serving an empty buffer: buffer 2 starts empty when q = (1, 0)
  auto sc = plan.scaling;
  sc.q = vec({1, 0});
  auto mat2 = materialize(plan.spec, sc, 4.0);
  FixedPolicy eager;
  eager.serve = {0, 1};
  CHECK_THROWS_AS(run(plan.spec, mat2, eager, 0.5, 1), PolicyInfeasibleError);

  // wrong decision size
  FixedPolicy wide;
  wide.serve = {0};
  CHECK_THROWS_AS(run(plan.spec, mat, wide, 0.5, 1), PolicyInfeasibleError);
}

TEST_CASE("idling policies accumulate idleness, not allocation") {
  auto plan = example_plan("single");
  auto mat = materialize(plan.spec, plan.scaling, 5.0);
  FixedPolicy lazy;
  lazy.serve = {-1};
  auto trace = run(plan.spec, mat, lazy, 0.5, 3);
  CHECK(trace.T_samples.back()(0) == 0.0);
  CHECK(trace.I_samples.back()(0) == doctest::Approx(12.5));
  // queue only grows: arrivals minus no services
  CHECK(trace.Q_samples.back()(0) == trace.q0(0) + trace.E_samples.back()(0));
}

TEST_CASE("work-conserving single queue stays near its fluid profile") {
  // loaded at rho ~ 1 - 1/r: the fluid queue holds near q0 over short spans
  auto plan = example_plan("single");
  auto mat = materialize(plan.spec, plan.scaling, 30.0);
  WorkConservingPolicy pol;
  auto trace = run(plan.spec, mat, pol, 0.5, 100);
  auto views = scale_views(trace, plan, mat);
  // fluid scale: Qbar stays within O(1/r) of its start
  for (int g = 0; g < static_cast<int>(views.t.size()); ++g) {
    CHECK(views.Qbar(g, 0) < 0.3);
  }
  // diffusion scale: busy server means Yhat ~ Ihat ~ small, and the
  // workload view equals Lambda Qhat
  CHECK(max_abs(Mat(views.What - views.Qhat * plan.Lambda.transpose())) < 1e-12);
}

TEST_CASE("scaled views center by the materialized rates") {
  auto plan = example_plan("tandem");
  auto mat = materialize(plan.spec, plan.scaling, 10.0);
  WorkConservingPolicy pol;
  auto trace = run(plan.spec, mat, pol, 1.0, 5);
  auto views = scale_views(trace, plan, mat);
  int last = static_cast<int>(views.t.size()) - 1;

  // reconstruct Ehat by hand at the final grid point
  double s = trace.t_grid[last] * 100.0;
  double want = (trace.E_samples[last](0) - mat.alpha_r(0) * s) / 10.0;
  CHECK(views.Ehat(last, 0) == doctest::Approx(want));

  // Yhat = (x* s - T)/r and Uhat = Kmat Yhat
  Vec yhat = (plan.xstar * s - trace.T_samples[last]) / 10.0;
  CHECK(max_abs(Vec(views.Yhat.row(last).transpose() - yhat)) < 1e-12);
  CHECK(max_abs(Vec(views.Uhat.row(last).transpose() - plan.Kmat * yhat)) <
        1e-12);

  // silent class has no arrivals at all
  CHECK(trace.E_samples[last](1) == 0);
}

TEST_CASE("discounted cost integrates segments exactly") {
  auto plan = example_plan("single");
  auto mat = materialize(plan.spec, plan.scaling, 4.0);
  WorkConservingPolicy pol;
  auto trace = run(plan.spec, mat, pol, 1.5, 23);

  double gamma = 0.8;
  auto cost = sim_cost(trace, plan, vec({2}), Vec(), gamma);
  // hand quadrature over the recorded segments
  double want = 0.0;
  for (const auto& seg : trace.segments) {
    double t0 = seg.s0 / 16.0, t1 = seg.s1 / 16.0;
    want += (std::exp(-gamma * t0) - std::exp(-gamma * t1)) / gamma * 2.0 *
            seg.q(0) / 4.0;
  }
  CHECK(cost.holding == doctest::Approx(want).epsilon(1e-12));
  CHECK(cost.pushing == 0.0);
  CHECK(cost.total == doctest::Approx(cost.holding));
  CHECK(cost.tail ==
        doctest::Approx(std::exp(-gamma * 1.5) / gamma * 2.0 *
                        trace.Q_samples.back()(0) / 4.0));
}

TEST_CASE("pushing cost charges the allocation shortfall") {
  auto plan = example_plan("single");
  auto mat = materialize(plan.spec, plan.scaling, 4.0);
  // idle policy: K a = 0, so dU/dt = r Kx* = r throughout
  FixedPolicy lazy;
  lazy.serve = {-1};
  auto trace = run(plan.spec, mat, lazy, 1.0, 3);
  double gamma = 1.0;
  auto cost = sim_cost(trace, plan, vec({0}), vec({1}), gamma);
  // integral of e^-t r dt over [0, 1] = r (1 - e^-1)
  CHECK(cost.pushing == doctest::Approx(4.0 * (1.0 - std::exp(-1.0))).epsilon(1e-9));
  CHECK(cost.holding == 0.0);

  // work-conserving run on a busy system pushes almost nothing
  WorkConservingPolicy pol;
  auto busy_trace = run(plan.spec, mat, pol, 1.0, 3);
  auto busy_cost = sim_cost(busy_trace, plan, vec({0}), vec({1}), gamma);
  CHECK(busy_cost.pushing < 0.25 * cost.pushing);
}

TEST_CASE("netput reconstruction matches the scaled views at events") {
  struct Probe : Policy {
    WorkConservingPolicy inner;
    Vec last_netput;
    double last_s = -1.0;
    PolicyDecision decide(const SimObs& obs) override {
      last_netput = diffusion_netput(obs);
      last_s = obs.s;
      return inner.decide(obs);
    }
  };
  auto plan = example_plan("tandem");
  auto mat = materialize(plan.spec, plan.scaling, 6.0);
  Probe probe;
  auto trace = run(plan.spec, mat, probe, 1.0, 13);
  REQUIRE(probe.last_s >= 0.0);

  // netput = Qhat - reflection terms; at the horizon reconstruct by hand:
  // xhat_i = q0/r + centered arrivals - C row sum of centered completions
  //          + routed centering + routing fluctuation
  // cross-check dimension and finiteness, plus the exact identity
  // Q = q0 + E - C S + sum_j Phi_j row-wise (integer flow balance) which
  // makes xhat - Qhat/1 a pure centering artifact
  CHECK(probe.last_netput.size() == 2);
  CHECK(std::isfinite(probe.last_netput(0)));
  CHECK(std::isfinite(probe.last_netput(1)));

  // on a path with no routing fluctuation (deterministic exits), the
  // reconstruction reduces to Qhat + beta_r (T - x* s)/r ... verify through
  // the simple single-station case below
  auto plan1 = example_plan("single");
  auto mat1 = materialize(plan1.spec, plan1.scaling, 6.0);
  Probe probe1;
  auto trace1 = run(plan1.spec, mat1, probe1, 1.0, 13);
  double s = probe1.last_s;
  // single station: xhat = q0/r + (E - alpha s)/r - (S - beta T)/r
  // and Q = q0 + E - S exactly, so
  // xhat = Q/r - (alpha s - beta T)/r
  double r = 6.0;
  double want = trace1.Q_samples.back()(0) / r -
                (mat1.alpha_r(0) * s - mat1.beta_r(0) *
                 trace1.T_samples.back()(0)) / r;
  // last policy call happens at the final event before the horizon, not at
  // the grid point; recompute from the trace tail is only approximate, so
  // assert the identity through the probe's own counters instead
  (void)want;
  struct Exact : Policy {
    WorkConservingPolicy inner;
    const MaterializedNetwork* mat = nullptr;
    double max_err = 0.0;
    PolicyDecision decide(const SimObs& obs) override {
      Vec xhat = diffusion_netput(obs);
      double direct = obs.q0(0) / obs.r +
                      (obs.E(0) - mat->alpha_r(0) * obs.s) / obs.r -
                      (obs.S(0) - mat->beta_r(0) * obs.T(0)) / obs.r;
      max_err = std::max(max_err, std::abs(xhat(0) - direct));
      return inner.decide(obs);
    }
  };
  Exact exact;
  exact.mat = &mat1;
  run(plan1.spec, mat1, exact, 0.5, 29);
  CHECK(exact.max_err < 1e-12);
}

TEST_CASE("netput mean stays flat for the balanced system") {
  // centering by the materialized rates removes both the nominal throughput
  // and the 1/r drift perturbation, so the netput is a mean-q0/r fluctuation;
  // the drift theta re-enters only through the review rule's feature map
  auto plan = example_plan("single");
  double r = 20.0;
  auto mat = materialize(plan.spec, plan.scaling, r);
  struct Last : Policy {
    WorkConservingPolicy inner;
    Vec v;
    PolicyDecision decide(const SimObs& obs) override {
      v = diffusion_netput(obs);
      return inner.decide(obs);
    }
  };
  double t_max = 0.5;
  double acc = 0.0;
  int n = 40;
  for (int seed = 0; seed < n; ++seed) {
    Last pol;
    run(plan.spec, mat, pol, t_max, 1000 + seed);
    acc += pol.v(0);
  }
  double mean = acc / n;
  double want = mat.q_r(0) / r;
  // 4 sigma at per-path variance ~ Sigma t = 1
  CHECK(std::abs(mean - want) < 4.0 / std::sqrt(double(n)));
}
