#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "spnet/bcp_eval.hpp"
#include "spnet/brownian.hpp"

using namespace spnet;
using namespace spnet::testing;

namespace {

JumpRuleControl zero_rule() {
  JumpRuleControl r;
  r.T = 1.0;
  r.p0 = 2;
  r.j0 = 2;
  r.eta = 0.25;
  r.M = 1.0;
  r.kind = RuleKind::Zero;
  return r;
}

// Discounted value of the reflected drifted Brownian motion started at q:
// E int_0^inf e^(-gamma t) Z_t dt with Z = q + theta t + sigma B + reflection.
double rbm_resolvent(double q, double theta, double sigma2, double gamma) {
  double lam = (-theta - std::sqrt(theta * theta + 2.0 * sigma2 * gamma)) / sigma2;
  double B = -1.0 / (gamma * lam);
  return q / gamma + theta / (gamma * gamma) + B * std::exp(lam * q);
}

}  // namespace

TEST_CASE("single-station zero-rule cost matches the resolvent") {
  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({1});
  cost.p = vec({0});

  double want0 = rbm_resolvent(0.0, -1.0, 2.0, 1.0);
  CHECK(want0 == doctest::Approx(0.6180339887498949).epsilon(1e-12));

  auto est = evaluate_bcp_cost(plan, zero_rule(), vec({0}), cost, 2e-3, 8.0,
                               4000, 11);
  CHECK(est.reps == 4000);
  CHECK(est.se < 0.02);
  CHECK(std::abs(est.mean - want0) < 3.0 * est.se + est.tail_bound);
  CHECK(est.mean_pushing == 0.0);
  CHECK(est.mean_holding == doctest::Approx(est.mean));

  double want1 = rbm_resolvent(1.0, -1.0, 2.0, 1.0);
  auto est1 = evaluate_bcp_cost(plan, zero_rule(), vec({1}), cost, 2e-3, 8.0,
                                4000, 12);
  CHECK(std::abs(est1.mean - want1) < 3.0 * est1.se + est1.tail_bound);
}

TEST_CASE("single-station estimate agrees with the recorded oracle") {
  // fixture generated by tools/rbm_fixture_gen on a finer grid
  std::ifstream f("tests/fixtures/rbm_oracle.txt");
  if (!f) {
    f.open("../tests/fixtures/rbm_oracle.txt");
  }
  REQUIRE_MESSAGE(bool(f), "run from the repository root (or build/)");
  double closed = 0.0, mc_mean = 0.0, mc_se = 0.0;
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream is(line);
    std::string key, eq;
    double v;
    if ((is >> key >> eq >> v) && eq == "=") {
      if (key == "closed_form") closed = v;
      if (key == "mc_mean") mc_mean = v;
      if (key == "mc_se") mc_se = v;
    }
  }
  REQUIRE(closed > 0.0);
  REQUIRE(mc_se > 0.0);
  CHECK(std::abs(mc_mean - closed) < 4.0 * mc_se);

  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({1});
  cost.p = vec({0});
  auto est =
      evaluate_bcp_cost(plan, zero_rule(), vec({0}), cost, 1e-3, 8.0, 5000, 21);
  double band = 3.0 * std::sqrt(est.se * est.se + mc_se * mc_se) +
                est.tail_bound + 1e-3;
  CHECK(std::abs(est.mean - mc_mean) < band);
}

TEST_CASE("estimates are deterministic in the seed") {
  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({1});
  cost.p = vec({0});
  auto a = evaluate_bcp_cost(plan, zero_rule(), vec({1}), cost, 0.01, 2.0, 50, 9);
  auto b = evaluate_bcp_cost(plan, zero_rule(), vec({1}), cost, 0.01, 2.0, 50, 9);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  auto c = evaluate_bcp_cost(plan, zero_rule(), vec({1}), cost, 0.01, 2.0, 50, 10);
  CHECK(a.mean != c.mean);
}

TEST_CASE("pushing cost accumulates through the discounted regulator") {
  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({0});
  cost.p = vec({1});
  // zero holding cost: the mean is purely the discounted idleness push
  auto est =
      evaluate_bcp_cost(plan, zero_rule(), vec({0}), cost, 0.005, 6.0, 1500, 33);
  CHECK(est.mean_holding == 0.0);
  CHECK(est.mean == doctest::Approx(est.mean_pushing));
  // closed form: g solves (sigma^2/2) g'' + theta g' = gamma g with
  // g'(0) = -1, bounded; g(0) = -1/lambda with lambda the negative root of
  // the characteristic equation. Here lambda = (1 - sqrt 5)/2.
  double lam = (1.0 - std::sqrt(5.0)) / 2.0;
  double want = -1.0 / lam;
  CHECK(std::abs(est.mean - want) < 3.0 * est.se + 0.01 + est.tail_bound);
}

TEST_CASE("longer horizons shrink the reported tail bound") {
  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({1});
  cost.p = vec({0});
  auto s = evaluate_bcp_cost(plan, zero_rule(), vec({0}), cost, 0.01, 3.0, 200, 3);
  auto l = evaluate_bcp_cost(plan, zero_rule(), vec({0}), cost, 0.01, 9.0, 200, 3);
  CHECK(l.tail_bound < s.tail_bound);
  CHECK(l.tail_bound < 0.01);
}

TEST_CASE("argument validation rejects inconsistent setups") {
  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({1});
  cost.p = vec({0});
  auto r = zero_rule();
  CHECK_THROWS_AS(evaluate_bcp_cost(plan, r, vec({-1}), cost, 0.01, 2, 10, 1),
                  InvalidParamsError);
  CHECK_THROWS_AS(evaluate_bcp_cost(plan, r, vec({1}), cost, 0.01, 0.5, 10, 1),
                  InvalidParamsError);  // horizon < T
  CHECK_THROWS_AS(evaluate_bcp_cost(plan, r, vec({1}), cost, 0.01, 2, 0, 1),
                  InvalidParamsError);
  cost.gamma = 0.0;
  CHECK_THROWS_AS(evaluate_bcp_cost(plan, r, vec({1}), cost, 0.01, 2, 10, 1),
                  InvalidParamsError);
  cost.gamma = 1.0;
  cost.h = vec({1, 2});
  CHECK_THROWS_AS(evaluate_bcp_cost(plan, r, vec({1}), cost, 0.01, 2, 10, 1),
                  InvalidParamsError);
}

TEST_CASE("effective cost picks the cheapest buffer for a workload") {
  // series line: Lambda = [[1,0],[1,1]]; workload w = (a, b) needs q1 = a
  // and q2 = b - a; holding h = (1, 2) prices that directly
  auto plan = example_plan("tandem");
  Vec h = vec({1, 2});
  auto ec = effective_cost(plan, h, vec({0.25, 0.75}));
  CHECK(ec.value == doctest::Approx(0.25 + 2 * 0.5));
  CHECK(ec.minimizer(0) == doctest::Approx(0.25));
  CHECK(ec.minimizer(1) == doctest::Approx(0.5));

  // infeasible: second workload coordinate below the first
  CHECK_THROWS_AS(effective_cost(plan, h, vec({0.5, 0.25})),
                  InfeasibleWorkloadError);
}

TEST_CASE("effective cost is positively homogeneous beyond the unit ball") {
  auto plan = example_plan("tandem");
  Vec h = vec({1, 2});
  auto small = effective_cost(plan, h, vec({0.3, 0.4}));
  auto big = effective_cost(plan, h, vec({30, 40}));
  CHECK(big.value == doctest::Approx(100.0 * small.value));
  CHECK(max_abs(Vec(big.minimizer - 100.0 * small.minimizer)) < 1e-6);
}

TEST_CASE("fork effective cost rides the cheaper branch") {
  // single workload dimension: Lambda = [1, 1], so w spreads over two buffers
  auto plan = example_plan("n_network");
  auto ec = effective_cost(plan, vec({1, 3}), vec({0.8}));
  CHECK(ec.value == doctest::Approx(0.8));
  CHECK(ec.minimizer(0) == doctest::Approx(0.8));
  CHECK(ec.minimizer(1) == doctest::Approx(0.0));
}

TEST_CASE("workload-space cost integrates the effective cost plus pushing") {
  auto plan = example_plan("single");
  // deterministic workload path decaying linearly 1 -> 0 over [0, 1] with a
  // unit control step at t = 0.5
  PiecewisePath W;
  W.t = {0, 0.5, 1.0};
  W.values = Mat(3, 1);
  W.values << 1.0, 0.5, 0.0;
  W.interp = Interp::PiecewiseLinear;
  PiecewisePath U;
  U.t = {0, 0.5, 1.0};
  U.values = Mat(3, 1);
  U.values << 0.0, 1.0, 1.0;
  U.interp = Interp::PiecewiseConstant;

  double gamma = 1.0;
  double got = evaluate_ewf_cost(plan, vec({1}), vec({2}), U, W, gamma);
  // holding: trapezoid of e^-t W(t) on the two segments
  auto seg = [&](double t0, double t1, double w0, double w1) {
    return 0.5 * (t1 - t0) * (std::exp(-t0) * w0 + std::exp(-t1) * w1);
  };
  double hold = seg(0, 0.5, 1.0, 0.5) + seg(0.5, 1.0, 0.5, 0.0);
  double push = 2.0 * std::exp(-0.5);
  CHECK(got == doctest::Approx(hold + push).epsilon(1e-12));

  // decreasing control is rejected
  PiecewisePath Ubad = U;
  Ubad.values << 0.0, 1.0, 0.5;
  CHECK_THROWS_AS(evaluate_ewf_cost(plan, vec({1}), vec({2}), Ubad, W, gamma),
                  InvalidParamsError);

  // infeasible workload is rejected
  PiecewisePath Wbad = W;
  Wbad.values << 1.0, -0.5, 0.0;
  CHECK_THROWS_AS(evaluate_ewf_cost(plan, vec({1}), vec({2}), U, Wbad, gamma),
                  StateConstraintError);
}

TEST_CASE("workload cost of the reflected single queue matches the direct cost") {
  // push the driving path through the state-space evaluator and the
  // workload-space evaluator: identical numbers for h = 1 (R = Lambda = 1)
  auto plan = example_plan("single");
  CostParams cost;
  cost.gamma = 1.0;
  cost.h = vec({1});
  cost.p = vec({0.5});
  auto est = evaluate_bcp_cost(plan, zero_rule(), vec({1}), cost, 0.01, 2.0, 8, 71);

  // rebuild one path by hand and compare trapezoid sums
  auto batch = simulate_zeta(vec({1}), plan.theta, plan.Sigma, 0.01, 2.0, 8, 71,
                             true);
  double acc = 0.0;
  for (int rep = 0; rep < 8; ++rep) {
    PiecewisePath zeta;
    zeta.t = batch.times;
    zeta.values = batch.paths[rep];
    zeta.interp = Interp::PiecewiseLinear;
    auto cp = build_control(plan, prepare_rule(plan, zero_rule()), zeta,
                            batch.real_nodes, nullptr);
    PiecewisePath W = cp.Q;  // Lambda = 1
    // restrict the holding quadrature to real nodes, as the evaluator does
    PiecewisePath Wr;
    for (int idx : batch.real_nodes) {
      Wr.t.push_back(W.t[idx]);
    }
    Wr.values = Mat(static_cast<long>(batch.real_nodes.size()), 1);
    for (size_t k = 0; k < batch.real_nodes.size(); ++k) {
      Wr.values(static_cast<long>(k), 0) = W.values(batch.real_nodes[k], 0);
    }
    Wr.interp = Interp::PiecewiseLinear;
    acc += evaluate_ewf_cost(plan, cost.h, cost.p, cp.U, Wr, cost.gamma);
  }
  CHECK(acc / 8.0 == doctest::Approx(est.mean).epsilon(1e-9));
}
