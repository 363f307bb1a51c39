#pragma once
#include <cstdint>
#include <optional>
#include <vector>

#include "spnet/path.hpp"
#include "spnet/plan.hpp"
#include "spnet/rng.hpp"

namespace spnet {

// One randomized outcome of a jump kernel: the lattice point b (units of eta)
// with its probability.
struct LatticeJump {
  IVec b;
  double prob = 0.0;
};

enum class RuleKind { Zero, Threshold, Kernel };

// Deterministic feedback row: fires when the quantized workload coordinate
// reaches the threshold. First matching row wins.
struct ThresholdRow {
  int component = 0;
  double threshold = 0.0;
  IVec b;
};

struct KernelRow {
  int component = 0;
  double threshold = 0.0;
  std::vector<LatticeJump> outcomes;
};

// Review-epoch control: at t = n T/p0 the state jumps by
// vartheta_eps(Q(t-), jump_n); jump_0 = 0, later jumps come from the rule fed
// with the noise history sampled every kappa_s = T/(p0 j0). Jumps live on
// {b eta : b integer, |b eta| <= M, Kmat b >= 0}.
struct JumpRuleControl {
  double T = 1.0;
  int p0 = 1;
  int j0 = 1;
  double eta = 0.25;
  double M = 1.0;
  double eps0 = 0.0;
  RuleKind kind = RuleKind::Zero;
  std::vector<ThresholdRow> rows;
  std::vector<KernelRow> kernel_rows;
  double feature_quant = 0.0;  // workload quantization step, 0 = none
  Vec y_star;                  // interior direction; filled by prepare_rule

  double theta_g() const { return T / p0; }
  double kappa_s() const { return T / (p0 * static_cast<double>(j0)); }
};

// Validates lattice membership of every row (norm bound and cone condition)
// and fills y_star when eps0 > 0. Throws LatticeViolationError /
// InvalidParamsError.
JumpRuleControl prepare_rule(const StaticPlan& plan, JumpRuleControl rule);

// Inverse-CDF selection over lattice outcomes: outcomes are laid out on [0,1)
// in canonical (lexicographic in b) order and u picks its interval. Throws
// KernelNotStochasticError unless probs are nonnegative and sum to 1 (1e-12).
IVec sample_jump(const std::vector<LatticeJump>& outcomes, double u);

// Rule evaluation at epoch n given the sampled noise history (increments of
// the centered free process at the kappa_s grid). u feeds kernel rows only.
Vec rule_jump(const JumpRuleControl& rule, const StaticPlan& plan, int n,
              const std::vector<Vec>& x_samples, const Vec& q, double u);

struct BuildOptions {
  double sp_tol = 1e-10;
  int sp_max_sweeps = 10000;
  int vartheta_grid = 64;
};

// Displacement map: the state jump y followed by one time unit of regulation
// against the post-jump position. vartheta(q0, 0) = 0 identically.
Vec vartheta(const StaticPlan& plan, const Vec& q0, const Vec& y,
             int grid = 64, double sp_tol = 1e-10);

struct ControlledPath {
  PiecewisePath Q;  // regulated state, dim I
  PiecewisePath Y;  // cumulative control, dim J
  PiecewisePath U;  // Kmat Y, dim N, nondecreasing for admissible controls
};

// Runs the jump-and-regulate recursion over one driving path. real_nodes
// restricts epoch/sample lookup to non-synthetic grid points (empty = all).
// jump_rng feeds kernel rules (may be null otherwise).
ControlledPath build_control(const StaticPlan& plan, const JumpRuleControl& rule,
                             const PiecewisePath& zeta,
                             const std::vector<int>& real_nodes,
                             RngStream* jump_rng,
                             const BuildOptions& opt = BuildOptions());

// Empirical Lipschitz bound of y -> vartheta(q0, y): max of |vartheta| / |y|
// over random probes (q0 on a nonnegative box, y with Kmat y >= 0). Heuristic;
// feeds only the stretch-length validity warning of the tracking policy.
double estimate_vartheta_lip(const StaticPlan& plan, int n_probes = 200,
                             uint64_t seed = 20240901);

// Reduction of an arbitrary control path to review-epoch lattice jumps:
// optional running-average smoothing (window 1/n0), sample-and-hold on the
// epoch grid, componentwise ceiling to the lattice, then zeroing of jumps
// whose norm exceeds M. Returns p0+1 jump values (index 0 = initial jump).
std::vector<Vec> discretize_control(const PiecewisePath& Y, int p0, double eta,
                                    double M, int n0 = 0);

}  // namespace spnet
