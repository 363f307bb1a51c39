#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "spnet/control.hpp"
#include "spnet/spec_file.hpp"

using namespace spnet;
using namespace spnet::testing;

namespace {

const char* kMinimal = R"(# single station
[topology]
buffers = 1
activities = 1
servers = 1
C =
1
A =
1

[routing]
activity 1 = 1 0

[primitives]
arrival 1 = exponential
service 1 = exponential

[scaling]
alpha = 1
sigma_u = 1
theta1 = -1
beta = 1
sigma_v = 1
q = 1
)";

std::string patched(const std::string& from, const std::string& to) {
  std::string s = kMinimal;
  auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("minimal file parses with defaults applied") {
  auto d = parse_spec_text(kMinimal, "mem");
  CHECK(d.spec.I == 1);
  CHECK(d.spec.J == 1);
  CHECK(d.spec.K == 1);
  CHECK(d.spec.routing(0, 0) == 1.0);
  CHECK(d.spec.arrival_family[0] == PrimitiveFamily::Exponential);
  CHECK(d.scaling.alpha(0) == 1.0);
  CHECK(d.scaling.theta2(0) == 0.0);  // defaulted
  CHECK(d.scaling.q(0) == 1.0);
  CHECK(d.scaling.r_list.empty());
  CHECK_FALSE(d.workload.has_value());
  CHECK_FALSE(d.policy.has_value());
  CHECK_FALSE(d.cost.has_value());
}

TEST_CASE("errors carry the origin and line number") {
  auto bad = patched("alpha = 1", "alpha = 1 2");
  try {
    parse_spec_text(bad, "probe.spnet");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("probe.spnet:") == 0);
    CHECK(msg.find("alpha") != std::string::npos);
  }
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_spec_text(patched("alpha = 1", "alpha = 1\nbogus = 3"),
                                  "m"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_spec_text(std::string(kMinimal) + "\n[nonsense]\nx = 1\n", "m"),
      ParseError);
}

TEST_CASE("duplicate sections and missing requirements are rejected") {
  CHECK_THROWS_AS(
      parse_spec_text(std::string(kMinimal) + "\n[scaling]\nalpha = 1\n", "m"),
      ParseError);
  // drop a required key
  CHECK_THROWS_AS(parse_spec_text(patched("beta = 1\n", ""), "m"), ParseError);
  // drop a required section
  auto no_routing = patched("[routing]\nactivity 1 = 1 0\n\n", "");
  CHECK_THROWS_AS(parse_spec_text(no_routing, "m"), ParseError);
}

TEST_CASE("numbers must parse cleanly") {
  CHECK_THROWS_AS(parse_spec_text(patched("alpha = 1", "alpha = fast"), "m"),
                  ParseError);
  CHECK_THROWS_AS(parse_spec_text(patched("buffers = 1", "buffers = 1.5"), "m"),
                  ParseError);
  // matrix row of the wrong width
  CHECK_THROWS_AS(parse_spec_text(patched("C =\n1\n", "C =\n1 1\n"), "m"),
                  ParseError);
}

TEST_CASE("semantic validation runs after parsing") {
  // routing row failing to sum to one is a bundle-level violation
  auto bad = patched("activity 1 = 1 0", "activity 1 = 0.5 0");
  CHECK_THROWS_AS(parse_spec_text(bad, "m"), ParseError);
  // negative service rate
  CHECK_THROWS_AS(parse_spec_text(patched("beta = 1", "beta = -1"), "m"),
                  ParseError);
}

TEST_CASE("r_list must be positive and strictly increasing") {
  auto good = patched("q = 1", "q = 1\nr_list = 2 4 8");
  CHECK(parse_spec_text(good, "m").scaling.r_list ==
        std::vector<double>{2, 4, 8});
  CHECK_THROWS_AS(
      parse_spec_text(patched("q = 1", "q = 1\nr_list = 4 2"), "m"),
      ParseError);
  CHECK_THROWS_AS(
      parse_spec_text(patched("q = 1", "q = 1\nr_list = 0 2"), "m"),
      ParseError);
}

TEST_CASE("policy section parses rules with lattice rows") {
  std::string with_policy = std::string(kMinimal) + R"(
[policy]
kappa_exp = 0.2
m = 18
d1 = 2.05
rho = 4
T = 4
p0 = 4
j0 = 2
eta = 0.25
M_bound = 2
eps0 = 0.05
rule = threshold
trow = 1 0.5 ; 4
)";
  auto d = parse_spec_text(with_policy, "m");
  REQUIRE(d.policy.has_value());
  CHECK(d.policy->kappa_exp == 0.2);
  CHECK(d.policy->m_exp == 18.0);
  CHECK(d.policy->rule.T == 4.0);
  CHECK(d.policy->rule.M == 2.0);
  CHECK(d.policy->rule.eps0 == 0.05);
  REQUIRE(d.policy->rule.kind == RuleKind::Threshold);
  REQUIRE(d.policy->rule.rows.size() == 1);
  CHECK(d.policy->rule.rows[0].component == 0);  // 1-based in file
  CHECK(d.policy->rule.rows[0].threshold == 0.5);
  CHECK(d.policy->rule.rows[0].b(0) == 4);
}

TEST_CASE("kernel rows parse verbatim, stochasticity is checked on prepare") {
  std::string base = std::string(kMinimal) + R"(
[policy]
kappa_exp = 0.2
m = 18
d1 = 2.05
rho = 4
T = 4
p0 = 4
j0 = 2
eta = 0.25
M_bound = 2
eps0 = 0
rule = kernel
krow = 1 0.5 ; 0.25 4 ; 0.75 0
)";
  auto d = parse_spec_text(base, "m");
  REQUIRE(d.policy->rule.kind == RuleKind::Kernel);
  REQUIRE(d.policy->rule.kernel_rows.size() == 1);
  CHECK(d.policy->rule.kernel_rows[0].outcomes[0].prob == 0.25);
  CHECK(d.policy->rule.kernel_rows[0].outcomes[1].b(0) == 0);
  auto plan = build_plan(d.spec, d.scaling);
  CHECK_NOTHROW(prepare_rule(plan, d.policy->rule));

  auto bad = base;
  bad.replace(bad.find("0.75 0"), 6, "0.70 0");
  auto d_bad = parse_spec_text(bad, "m");  // grammar is fine
  CHECK_THROWS_AS(prepare_rule(plan, d_bad.policy->rule),
                  KernelNotStochasticError);
}

TEST_CASE("rule names and lattice rows are checked in the grammar") {
  auto with = [](const std::string& policy_tail) {
    return std::string(kMinimal) + "\n[policy]\nT = 4\np0 = 4\n" + policy_tail;
  };
  CHECK_THROWS_AS(parse_spec_text(with("rule = bangbang\n"), "m"), ParseError);
  // threshold rule without any rows
  CHECK_THROWS_AS(parse_spec_text(with("rule = threshold\n"), "m"), ParseError);
  // trow needs exactly one ';'
  CHECK_THROWS_AS(parse_spec_text(with("rule = threshold\ntrow = 1 0.5 4\n"), "m"),
                  ParseError);
  // jump entries must be integers
  CHECK_THROWS_AS(
      parse_spec_text(with("rule = threshold\ntrow = 1 0.5 ; 1.5\n"), "m"),
      ParseError);
  // jump width must match the activity count
  CHECK_THROWS_AS(
      parse_spec_text(with("rule = threshold\ntrow = 1 0.5 ; 1 1\n"), "m"),
      ParseError);
  // krow outcome needs prob plus one entry per activity
  CHECK_THROWS_AS(parse_spec_text(with("rule = kernel\nkrow = 1 0 ; 1\n"), "m"),
                  ParseError);
  // fine: zero rule with no rows
  CHECK(parse_spec_text(with("rule = zero\n"), "m").policy->rule.kind ==
        RuleKind::Zero);
}

TEST_CASE("workload section carries the map pair") {
  std::string with_w = std::string(kMinimal) + R"(
[workload]
lambda =
1
g =
1
)";
  auto d = parse_spec_text(with_w, "m");
  REQUIRE(d.workload.has_value());
  CHECK(d.workload->Lambda(0, 0) == 1.0);
  CHECK(d.workload->G(0, 0) == 1.0);
}

TEST_CASE("render and reparse round-trips every example") {
  for (const auto& name : example_names()) {
    auto d = load_example(name);
    std::string text = render_spec_file(d);
    auto d2 = parse_spec_text(text, name);
    CHECK(d2.spec.I == d.spec.I);
    CHECK(d2.spec.C == d.spec.C);
    CHECK(d2.spec.A == d.spec.A);
    CHECK(max_abs(Mat(d2.spec.routing - d.spec.routing)) == 0.0);
    CHECK(max_abs(Vec(d2.scaling.alpha - d.scaling.alpha)) == 0.0);
    CHECK(max_abs(Vec(d2.scaling.sigma_v - d.scaling.sigma_v)) == 0.0);
    CHECK(d2.scaling.r_list == d.scaling.r_list);
    CHECK(d2.workload.has_value() == d.workload.has_value());
    if (d.workload) {
      CHECK(max_abs(Mat(d2.workload->Lambda - d.workload->Lambda)) == 0.0);
      CHECK(max_abs(Mat(d2.workload->G - d.workload->G)) == 0.0);
    }
    REQUIRE(d2.policy.has_value());
    CHECK(d2.policy->d1 == d.policy->d1);
    CHECK(d2.policy->rule.eta == d.policy->rule.eta);
    REQUIRE(d2.cost.has_value());
    CHECK(max_abs(Vec(d2.cost->h - d.cost->h)) == 0.0);
    // rendering the reparse reproduces the text byte for byte
    CHECK(render_spec_file(d2) == text);
  }
}

TEST_CASE("load_spec_file reads from disk and reports the path in errors") {
  std::string path = "/tmp/spnet_test_spec.spnet";
  {
    std::ofstream f(path);
    f << kMinimal;
  }
  auto d = load_spec_file(path);
  CHECK(d.spec.I == 1);
  CHECK_THROWS_AS(load_spec_file("/tmp/spnet_does_not_exist.spnet"),
                  SpnetError);
}

TEST_CASE("comments and blank lines are ignored everywhere") {
  std::string commented = R"(
# leading comment
[topology]
buffers = 1   # trailing comment
activities = 1
servers = 1
C =
1
A =
1
[routing]
activity 1 = 1 0
[primitives]
arrival 1 = exponential
service 1 = exponential

[scaling]
# inner comment
alpha = 1
sigma_u = 1
theta1 = -1
beta = 1
sigma_v = 1
q = 1
)";
  auto d = parse_spec_text(commented, "m");
  CHECK(d.spec.I == 1);
}
