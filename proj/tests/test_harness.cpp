#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "spnet/experiment.hpp"
#include "spnet/tracking.hpp"

using namespace spnet;
using namespace spnet::testing;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.bundle = load_example("single");
  cfg.r_list = {8, 12};
  cfg.reps = 2;
  cfg.seed = 17;
  cfg.t_max = 4.0;  // equals the review window
  cfg.bcp_dt = 0.05;
  cfg.bcp_horizon = 4.0;
  cfg.bcp_reps = 40;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("every example loads and plans") {
  auto names = example_names();
  REQUIRE(names.size() == 4);
  for (const auto& n : names) {
    auto d = load_example(n);
    CHECK(d.spec.I >= 1);
    REQUIRE(d.policy.has_value());
    REQUIRE(d.cost.has_value());
    StaticPlan plan = build_plan(d.spec, d.scaling, d.workload);
    CHECK(plan.heavy_traffic);
  }
  CHECK_THROWS_AS(load_example("mystery"), UnknownExampleError);
}

TEST_CASE("csv header formats version, kind, padded hash, seed") {
  CHECK(csv_header("simulate", 0xabcULL, 7) ==
        "# spnet 0.1.0 simulate config=0000000000000abc seed=7\n");
  CHECK(csv_header("convergence", 0xdeadbeefdeadbeefULL, 123) ==
        "# spnet 0.1.0 convergence config=deadbeefdeadbeef seed=123\n");
  CHECK(artifact_version() == "0.1.0");
}

TEST_CASE("config hash tracks everything but the seed") {
  auto cfg = small_config();
  auto h = config_hash(cfg);
  CHECK(h == config_hash(cfg));

  auto cfg2 = cfg;
  cfg2.seed = 99;
  CHECK(config_hash(cfg2) == h);  // seed excluded on purpose

  auto cfg3 = cfg;
  cfg3.bcp_dt = 0.01;
  CHECK(config_hash(cfg3) != h);

  auto cfg4 = cfg;
  cfg4.bundle.scaling.q(0) = 2.0;
  CHECK(config_hash(cfg4) != h);

  auto cfg5 = cfg;
  cfg5.r_list = {8};
  CHECK(config_hash(cfg5) != h);
}

TEST_CASE("replication seeds are stable and spread") {
  CHECK(replication_seed(17, 0, 0) == replication_seed(17, 0, 0));
  CHECK(replication_seed(17, 0, 0) != replication_seed(17, 0, 1));
  CHECK(replication_seed(17, 0, 1) != replication_seed(17, 1, 0));
  CHECK(replication_seed(17, 0, 0) != replication_seed(18, 0, 0));
}

TEST_CASE("convergence study is reproducible byte for byte") {
  auto cfg = small_config();
  auto rep1 = run_convergence(cfg);
  auto rep2 = run_convergence(cfg);
  CHECK(rep1.csv == rep2.csv);
  REQUIRE(rep1.rows.size() == 2);
  CHECK(rep1.rows[0].r == 8.0);
  CHECK(rep1.rows[1].r == 12.0);
  for (const auto& row : rep1.rows) {
    CHECK(row.reps == 2);
    CHECK(row.mean > 0.0);
    CHECK(row.gap == doctest::Approx(std::abs(row.mean - rep1.bcp.mean)).epsilon(1e-15));
  }
  CHECK(rep1.bcp.reps == 40);

  // layout: header comment, bcp comment, column names, one line per scale
  std::istringstream is(rep1.csv);
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("# spnet 0.1.0 convergence config=", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("# bcp mean=", 0) == 0);
  std::getline(is, line);
  CHECK(line == "r,mean,se,reps,gap");
  std::getline(is, line);
  CHECK(line.rfind("8,", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("12,", 0) == 0);
  CHECK_FALSE(std::getline(is, line));

  // a different seed moves the numbers
  auto cfg2 = cfg;
  cfg2.seed = 18;
  auto rep3 = run_convergence(cfg2);
  CHECK(rep3.csv != rep1.csv);
}

TEST_CASE("convergence study mirrors its table to the output file") {
  std::string path = "/tmp/spnet_test_conv.csv";
  std::remove(path.c_str());
  auto cfg = small_config();
  cfg.out_csv = path;
  auto rep = run_convergence(cfg);
  CHECK(slurp(path) == rep.csv);
  std::remove(path.c_str());
}

TEST_CASE("bad configurations are rejected before any work starts") {
  std::string path = "/tmp/spnet_test_conv_reject.csv";
  std::remove(path.c_str());

  auto cfg = small_config();
  cfg.out_csv = path;
  cfg.r_list.clear();
  cfg.bundle.scaling.r_list.clear();
  CHECK_THROWS_AS(run_convergence(cfg), InvalidParamsError);
  CHECK_FALSE(std::filesystem::exists(path));  // rejected before opening

  cfg = small_config();
  cfg.r_list = {12, 8};
  CHECK_THROWS_AS(run_convergence(cfg), InvalidParamsError);

  cfg = small_config();
  cfg.reps = 0;
  CHECK_THROWS_AS(run_convergence(cfg), InvalidParamsError);

  cfg = small_config();
  cfg.bundle.policy.reset();
  CHECK_THROWS_AS(run_convergence(cfg), InvalidParamsError);

  cfg = small_config();
  cfg.t_max = 1.0;  // shorter than the review window T = 4
  CHECK_THROWS_AS(run_convergence(cfg), InvalidParamsError);
}

TEST_CASE("empty experiment r_list falls back to the bundle") {
  auto cfg = small_config();
  cfg.r_list.clear();
  cfg.bundle.scaling.r_list = {8};
  auto rep = run_convergence(cfg);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].r == 8.0);
}

TEST_CASE("trace table carries scaled state, constraint, and workload columns") {
  auto d = load_example("single");
  StaticPlan plan = build_plan(d.spec, d.scaling);
  auto mat = materialize(d.spec, d.scaling, 8.0);
  auto policy = make_policy(plan, *d.policy, 8.0, 3);
  SimTrace trace = run(d.spec, mat, *policy, 0.5, 3);
  std::string csv = trace_csv(trace, plan, mat, *d.cost, 0x42, 3);

  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "# spnet 0.1.0 simulate config=0000000000000042 seed=3");
  std::getline(is, line);
  CHECK(line.rfind("# r=8 t_max=0.5 events=", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("# cost total=", 0) == 0);
  std::getline(is, line);
  CHECK(line.rfind("# checks identity_residual=", 0) == 0);
  std::getline(is, line);
  CHECK(line == "t,Qhat1,Uhat1,What1");
  int data_rows = 0;
  while (std::getline(is, line)) {
    if (!line.empty()) ++data_rows;
  }
  CHECK(data_rows == 201);  // default output grid

  // deterministic rerun renders the same bytes
  auto policy2 = make_policy(plan, *d.policy, 8.0, 3);
  SimTrace trace2 = run(d.spec, mat, *policy2, 0.5, 3);
  CHECK(trace_csv(trace2, plan, mat, *d.cost, 0x42, 3) == csv);
}

TEST_CASE("bcp table renders one summary row") {
  BCPCostEstimate est;
  est.mean = 0.5;
  est.se = 0.01;
  est.reps = 100;
  est.tail_bound = 0.001;
  JumpRuleControl rule;  // zero rule
  std::string csv = bcp_csv(est, rule, vec({1, 1}), 1.0, 0x123, 9);
  CHECK(csv ==
        "# spnet 0.1.0 bcp-eval config=0000000000000123 seed=9\n"
        "rule,q,gamma,mean,se,reps,tail_bound\n"
        "zero,1;1,1,0.5,0.01,100,0.001\n");
}
