#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "spnet/bcp_eval.hpp"
#include "spnet/simulate.hpp"
#include "spnet/spec_file.hpp"

namespace spnet {

// Convergence study: simulate the review policy at every scale in r_list and
// compare the discounted cost against the Monte Carlo value of the same jump
// rule in the diffusion model.
struct ExperimentConfig {
  SpecFileData bundle;
  std::vector<double> r_list;  // empty = bundle.scaling.r_list
  int reps = 20;               // sim replications per r
  std::uint64_t seed = 1;
  double t_max = 0.0;       // sim horizon on the diffusion clock; 0 = auto
  double bcp_dt = 1e-3;
  double bcp_horizon = 0.0;  // 0 = auto
  int bcp_reps = 20000;
  std::string out_csv;  // empty = report only; else rows are flushed per r
};

struct RLevelResult {
  double r = 0.0;
  double mean = 0.0, se = 0.0;
  int reps = 0;
  double gap = 0.0;  // |mean - bcp mean|
};

struct ConvergenceReport {
  BCPCostEstimate bcp;
  std::vector<RLevelResult> rows;
  std::string csv;  // full rendered table, header included
};

// Per r: materialize, build the tracking policy, run `reps` independent
// replications (sim and policy share one derived seed per replication),
// average total discounted cost including the post-horizon tail estimate.
// The BCP value is evaluated once, first. Rows are appended to out_csv as
// they complete, so an abort still leaves the finished prefix on disk.
// Throws InvalidParamsError on empty r_list, missing [policy], or bad reps.
ConvergenceReport run_convergence(const ExperimentConfig& cfg);

// Stable fingerprint of everything that shapes the numbers except the seed.
std::uint64_t config_hash(const ExperimentConfig& cfg);

std::string artifact_version();

// "# spnet <version> <kind> config=<hex hash> seed=<seed>"
std::string csv_header(const std::string& kind, std::uint64_t hash, std::uint64_t seed);

// Scaled trace table: t, Qhat per class, Uhat per constraint row, What per
// workload row; cost and bookkeeping summaries in leading comment lines.
std::string trace_csv(const SimTrace& trace, const StaticPlan& plan,
                      const MaterializedNetwork& mat, const CostParams& cost,
                      std::uint64_t hash, std::uint64_t seed);

// One-row table: rule,q,gamma,mean,se,reps,tail_bound.
std::string bcp_csv(const BCPCostEstimate& est, const JumpRuleControl& rule,
                    const Vec& q, double gamma, std::uint64_t hash,
                    std::uint64_t seed);

// Derived per-replication seed; stable across platforms.
std::uint64_t replication_seed(std::uint64_t base, int r_index, int rep);

}  // namespace spnet
