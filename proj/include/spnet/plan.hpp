#pragma once
#include <optional>
#include <string>
#include <vector>

#include "spnet/lp.hpp"
#include "spnet/network.hpp"

namespace spnet {

// Outcome of the capacity program  min rho : R x = alpha, A x <= rho 1, x >= 0.
struct LpOutcome {
  Vec xstar;          // original activity order
  double rho_star = 0.0;
  bool unique = false;            // single optimal x
  bool uniqueness_certified = false;  // vertex enumeration completed
  bool heavy_traffic = false;     // rho* = 1 and A xstar = 1 within tol
  std::vector<std::string> notes;
};

LpOutcome solve_static_lp(const NetworkSpec& spec, const ScalingScheme& sc);

// Everything the diffusion and policy layers consume. Activities are
// relabeled basic-first; perm maps new index -> original index.
struct StaticPlan {
  NetworkSpec spec;
  ScalingScheme scaling;
  std::vector<int> perm;
  int n_basic = 0;  // B
  Vec xstar;
  double rho_star = 1.0;
  bool lp_unique = true;
  bool lp_uniqueness_certified = true;
  bool heavy_traffic = true;

  Mat R;        // I x J   input-output: (C - P') diag(beta)
  Mat Kmat;     // N x J   N = K + J - B; rows = server allocation, then
                //         negated nonbasic identity
  Mat Lambda;   // L x I   workload map, L = I + K - B
  Mat G;        // L x N
  Vec theta;    // I       limit drift
  Mat Sigma;    // I x I   limit covariance
  Mat D;        // I x I   reflection matrix R diag(xstar) C'
  Vec gamma_star;  // I    nominal per-buffer throughput

  bool workload_exact = false;  // Lambda R = G Kmat held in exact arithmetic
  std::vector<std::string> notes;

  int I() const { return spec.I; }
  int J() const { return spec.J; }
  int Ksrv() const { return spec.K; }
  int L() const { return static_cast<int>(Lambda.rows()); }
  int Nrows() const { return static_cast<int>(Kmat.rows()); }
};

struct WorkloadInput {
  Mat Lambda;  // L x I
  Mat G;       // L x N
};

// Solves the LP, relabels, and assembles all derived matrices. For networks
// where each buffer has exactly one (basic) activity and J = I, the workload
// pair is derived as Lambda = Kmat R^-1, G = Id in exact arithmetic;
// otherwise `workload` must be supplied and is verified against
// Lambda R = G Kmat (exact when it holds, else within 1e-12).
// Throws: SpnetError (invalid bundle), WorkloadUnavailableError,
// WorkloadInconsistentError.
StaticPlan build_plan(const NetworkSpec& spec, const ScalingScheme& sc,
                      const std::optional<WorkloadInput>& workload = std::nullopt);

// Re-checks Lambda R - G Kmat = 0 in exact rational arithmetic on the stored
// double matrices.
bool workload_identity_exact(const StaticPlan& plan);

struct AssumptionReport {
  bool heavy_traffic = false;
  bool buffers_have_basic_activity = false;
  bool workload_lower_bound = false;   // |G u| >= c |u| on the nonneg cone
  double workload_lower_bound_c = 0.0;
  bool reflection_structure = false;   // completely-S via the recognized family
  double reflection_spectral_radius = 0.0;
  bool sigma_positive_definite = false;
  double sigma_min_eigenvalue = 0.0;
  std::vector<std::string> findings;

  bool all_ok() const {
    return heavy_traffic && buffers_have_basic_activity && workload_lower_bound &&
           reflection_structure && sigma_positive_definite;
  }
};

// Checks the standing assumptions the diffusion analysis rests on. The cone
// bound is estimated on coordinate directions plus n_samples random unit
// vectors of the nonnegative orthant.
AssumptionReport check_assumptions(const StaticPlan& plan, int n_samples = 10000,
                                   std::uint64_t seed = 12345);

struct PositiveDirection {
  Vec y;          // unit vector, K y >= 0 componentwise
  double margin;  // min_i (R y)_i > 0
};

// Finds y with Kmat y >= 0 and R y > 0 by LP (maximize the min coordinate of
// R y over the unit box). Throws DirectionNotFoundError when the best margin
// is not positive.
PositiveDirection find_positive_direction(const StaticPlan& plan);

}  // namespace spnet
