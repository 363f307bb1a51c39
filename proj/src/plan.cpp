#include "spnet/plan.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "spnet/errors.hpp"
#include "spnet/rational.hpp"
#include "spnet/rng.hpp"

namespace spnet {

namespace {

constexpr double kRhoTol = 1e-9;
constexpr double kBasicTol = 1e-9;

Mat input_output_matrix(const NetworkSpec& spec, const Vec& beta) {
  Mat cm = spec.C.cast<double>() - spec.p_prime();
  return cm * beta.asDiagonal();
}

}  // namespace

LpOutcome solve_static_lp(const NetworkSpec& spec, const ScalingScheme& sc) {
  const int I = spec.I, J = spec.J, K = spec.K;
  Mat R = input_output_matrix(spec, sc.beta);

  // variables (x_1..x_J, rho)
  Vec c = Vec::Zero(J + 1);
  c(J) = 1.0;
  Mat aeq(I, J + 1);
  aeq.leftCols(J) = R;
  aeq.col(J).setZero();
  Mat ain(K, J + 1);
  ain.leftCols(J) = spec.A.cast<double>();
  ain.col(J).setConstant(-1.0);
  LpResult lp = solve_lp(c, aeq, sc.alpha, ain, Vec::Zero(K));
  if (lp.status == LpStatus::Infeasible) {
    throw InfeasibleLpError("capacity program is infeasible: no allocation achieves the arrival rates");
  }
  if (lp.status == LpStatus::Unbounded) {
    throw SpnetError("capacity program unbounded (should not happen)");
  }

  LpOutcome out;
  out.xstar = lp.x.head(J);
  out.rho_star = lp.objective;

  // uniqueness: vertex count of the optimal face {x >= 0: Rx = alpha, Ax <= rho* 1}
  VertexEnumResult verts = enumerate_vertices(
      R, sc.alpha, spec.A.cast<double>(), Vec::Constant(K, out.rho_star));
  out.uniqueness_certified = verts.complete;
  if (verts.complete) {
    out.unique = verts.vertices.size() == 1;
    if (!out.unique) {
      out.notes.push_back("optimal allocation is not unique: " +
                          std::to_string(verts.vertices.size()) +
                          " optimal vertices");
    }
  } else {
    out.unique = false;
    out.notes.push_back("uniqueness not certified: optimal face too large to enumerate");
  }

  bool rho_one = std::abs(out.rho_star - 1.0) <= kRhoTol;
  Vec loads = spec.A.cast<double>() * out.xstar;
  bool all_busy = (loads - Vec::Ones(K)).cwiseAbs().maxCoeff() <= kRhoTol;
  out.heavy_traffic = rho_one && all_busy && out.unique;
  if (!rho_one) {
    std::ostringstream os;
    os << "heavy traffic fails: rho* = " << out.rho_star << " (want 1)";
    out.notes.push_back(os.str());
  } else if (!all_busy) {
    out.notes.push_back("heavy traffic fails: some server load is below 1 at the optimum");
  }
  return out;
}

namespace {

// Detects the one-activity-per-buffer square case where the workload pair can
// be derived exactly.
bool derivable_workload(const NetworkSpec& spec, int n_basic) {
  if (spec.J != spec.I || n_basic != spec.J) return false;
  for (int i = 0; i < spec.I; ++i) {
    if (spec.buffer_activities(i).size() != 1) return false;
  }
  return true;
}

}  // namespace

StaticPlan build_plan(const NetworkSpec& spec_in, const ScalingScheme& sc_in,
                      const std::optional<WorkloadInput>& workload) {
  ValidationReport v = validate_bundle(spec_in, sc_in);
  if (!v.ok()) throw SpnetError("invalid network bundle: " + v.joined());

  LpOutcome lp = solve_static_lp(spec_in, sc_in);
  Relabeling rel = reorder_basic_first(spec_in, sc_in, lp.xstar, kBasicTol);

  StaticPlan plan;
  plan.spec = rel.spec;
  plan.scaling = rel.scaling;
  plan.perm = rel.perm;
  plan.n_basic = rel.n_basic;
  plan.xstar = rel.xstar;
  plan.rho_star = lp.rho_star;
  plan.lp_unique = lp.unique;
  plan.lp_uniqueness_certified = lp.uniqueness_certified;
  plan.heavy_traffic = lp.heavy_traffic;
  plan.notes = lp.notes;

  bool permuted = false;
  for (size_t i = 0; i < plan.perm.size(); ++i) {
    if (plan.perm[i] != static_cast<int>(i)) permuted = true;
  }
  if (permuted) {
    std::ostringstream os;
    os << "activities relabeled basic-first:";
    for (int p : plan.perm) os << " " << (p + 1);
    plan.notes.push_back(os.str());
  }

  const int I = plan.spec.I, J = plan.spec.J, K = plan.spec.K;
  const int B = plan.n_basic;
  const int N = K + J - B;
  const int L = I + K - B;

  plan.R = input_output_matrix(plan.spec, plan.scaling.beta);
  plan.Kmat = Mat::Zero(N, J);
  plan.Kmat.topRows(K) = plan.spec.A.cast<double>();
  for (int jn = B; jn < J; ++jn) {
    plan.Kmat(K + jn - B, jn) = -1.0;
  }

  Mat cm = plan.spec.C.cast<double>() - plan.spec.p_prime();
  plan.theta = plan.scaling.theta1 - cm * plan.scaling.theta2.asDiagonal() * plan.xstar;

  Vec su(I);
  for (int i = 0; i < I; ++i) {
    double a = plan.scaling.alpha(i);
    su(i) = a * a * a * plan.scaling.sigma_u(i) * plan.scaling.sigma_u(i);
  }
  Vec sv(J);
  for (int j = 0; j < J; ++j) {
    double b = plan.scaling.beta(j);
    sv(j) = b * b * b * plan.scaling.sigma_v(j) * plan.scaling.sigma_v(j) * plan.xstar(j);
  }
  plan.Sigma = Mat(su.asDiagonal());
  plan.Sigma += cm * sv.asDiagonal() * cm.transpose();
  for (int j = 0; j < J; ++j) {
    double w = plan.scaling.beta(j) * plan.xstar(j);
    if (w != 0.0) plan.Sigma += w * routing_covariance(plan.spec, j);
  }
  plan.Sigma = 0.5 * (plan.Sigma + plan.Sigma.transpose().eval());

  plan.D = plan.R * plan.xstar.asDiagonal() * plan.spec.C.cast<double>().transpose();
  plan.gamma_star = Vec::Zero(I);
  for (int j = 0; j < J; ++j) {
    plan.gamma_star(plan.spec.buffer_of(j)) += plan.scaling.beta(j) * plan.xstar(j);
  }

  if (derivable_workload(plan.spec, B)) {
    RatMatrix r_rat = RatMatrix::from_double(plan.R);
    RatMatrix rinv;
    try {
      rinv = r_rat.inverse();
    } catch (const SpnetError&) {
      throw WorkloadInconsistentError("input-output matrix is singular; workload map undefined");
    }
    RatMatrix lam_rat = RatMatrix::from_double(plan.Kmat) * rinv;
    plan.Lambda = lam_rat.to_double();
    plan.G = Mat::Identity(L, N);
    for (int r = 0; r < plan.Lambda.rows(); ++r) {
      for (int c = 0; c < plan.Lambda.cols(); ++c) {
        if (plan.Lambda(r, c) < 0.0) {
          throw WorkloadInconsistentError("derived workload map has a negative entry");
        }
      }
    }
    // exactness survives only if the rational entries are representable
    RatMatrix back = RatMatrix::from_double(plan.Lambda);
    plan.workload_exact = (back - lam_rat).is_zero();
    if (!plan.workload_exact) {
      plan.notes.push_back("workload map rounded to doubles (entries are not dyadic)");
    }
    plan.notes.push_back("workload map derived from the inverted input-output matrix");
  } else if (workload.has_value()) {
    const Mat& lam = workload->Lambda;
    const Mat& g = workload->G;
    if (lam.rows() != L || lam.cols() != I || g.rows() != L || g.cols() != N) {
      throw WorkloadInconsistentError("workload matrices have wrong dimensions");
    }
    if (lam.minCoeff() < 0.0 || g.minCoeff() < 0.0) {
      throw WorkloadInconsistentError("workload matrices must be nonnegative");
    }
    RatMatrix lam_rat = RatMatrix::from_double(lam);
    if (lam_rat.rank() != L) {
      throw WorkloadInconsistentError("workload map does not have full row rank");
    }
    RatMatrix resid = lam_rat * RatMatrix::from_double(plan.R) -
                      RatMatrix::from_double(g) * RatMatrix::from_double(plan.Kmat);
    plan.workload_exact = resid.is_zero();
    if (!plan.workload_exact) {
      double err = max_abs(resid.to_double());
      if (err > 1e-12) {
        std::ostringstream os;
        os << "workload identity violated: max |Lambda R - G K| = " << err;
        throw WorkloadInconsistentError(os.str());
      }
      plan.notes.push_back("workload identity holds to 1e-12 but not exactly");
    }
    plan.Lambda = lam;
    plan.G = g;
    plan.notes.push_back("workload map supplied by the caller and verified");
  } else {
    throw WorkloadUnavailableError(
        "network is not one-activity-per-buffer square; supply workload matrices");
  }
  return plan;
}

bool workload_identity_exact(const StaticPlan& plan) {
  RatMatrix resid = RatMatrix::from_double(plan.Lambda) * RatMatrix::from_double(plan.R) -
                    RatMatrix::from_double(plan.G) * RatMatrix::from_double(plan.Kmat);
  return resid.is_zero();
}

AssumptionReport check_assumptions(const StaticPlan& plan, int n_samples,
                                   std::uint64_t seed) {
  AssumptionReport rep;
  const int I = plan.spec.I;
  const int B = plan.n_basic;
  const int N = plan.Nrows();

  rep.heavy_traffic = plan.heavy_traffic;
  if (!rep.heavy_traffic) {
    rep.findings.push_back("heavy traffic condition fails (see plan notes)");
  }

  rep.buffers_have_basic_activity = true;
  for (int i = 0; i < I; ++i) {
    bool found = false;
    for (int j = 0; j < B; ++j) {
      if (plan.spec.C(i, j) != 0) found = true;
    }
    if (!found) {
      rep.buffers_have_basic_activity = false;
      rep.findings.push_back("buffer " + std::to_string(i + 1) +
                             " has no basic activity");
    }
  }

  // |G u| >= c |u| on the nonnegative orthant, estimated on coordinate
  // directions and random nonnegative unit vectors.
  double c_min = std::numeric_limits<double>::infinity();
  for (int m = 0; m < N; ++m) {
    c_min = std::min(c_min, plan.G.col(m).norm());
  }
  RngStream rng(seed, 0xC0BE);
  for (int s = 0; s < n_samples; ++s) {
    Vec u(N);
    for (int m = 0; m < N; ++m) u(m) = std::abs(rng.normal());
    double norm = u.norm();
    if (norm == 0.0) continue;
    c_min = std::min(c_min, (plan.G * u).norm() / norm);
  }
  rep.workload_lower_bound_c = c_min;
  rep.workload_lower_bound = c_min > 1e-9;
  if (!rep.workload_lower_bound) {
    rep.findings.push_back("|G u| lower bound on the nonnegative cone is numerically zero");
  }

  // Reflection matrix family: all activities of one buffer must share a
  // routing row; the induced buffer-level chain must be transient.
  bool shared = true;
  Mat ptilde = Mat::Zero(I, I);
  for (int i = 0; i < I && shared; ++i) {
    std::vector<int> js = plan.spec.buffer_activities(i);
    for (size_t m = 1; m < js.size(); ++m) {
      if ((plan.spec.routing.row(js[m]) - plan.spec.routing.row(js[0]))
              .cwiseAbs()
              .maxCoeff() > 1e-12) {
        shared = false;
      }
    }
    if (shared && !js.empty()) {
      for (int i2 = 0; i2 < I; ++i2) ptilde(i, i2) = plan.spec.routing(js[0], i2 + 1);
    }
  }
  if (shared) {
    rep.reflection_spectral_radius = spectral_radius(ptilde);
    Mat want = (Mat::Identity(I, I) - ptilde.transpose()) * plan.gamma_star.asDiagonal();
    bool matches = (plan.D - want).cwiseAbs().maxCoeff() <= 1e-9;
    bool radius_ok = rep.reflection_spectral_radius < 1.0 - 1e-9;
    bool gamma_pos = plan.gamma_star.minCoeff() > 0.0;
    rep.reflection_structure = matches && radius_ok && gamma_pos;
    if (!radius_ok) {
      rep.findings.push_back("buffer-level routing chain is not transient");
    }
    if (!gamma_pos) {
      rep.findings.push_back("some buffer has zero nominal throughput");
    }
    if (!matches) {
      rep.findings.push_back("reflection matrix differs from the shared-routing form");
    }
  } else {
    bool diag_ok = plan.D.diagonal().minCoeff() > 0.0;
    Mat off = plan.D;
    off.diagonal().setZero();
    if (diag_ok && max_abs(off) <= 1e-12) {
      rep.reflection_structure = true;
      rep.reflection_spectral_radius = 0.0;
    } else {
      rep.reflection_structure = false;
      rep.findings.push_back(
          "activities of one buffer route differently and the reflection matrix "
          "is not diagonal; regulation is outside the supported families");
    }
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(plan.Sigma);
  rep.sigma_min_eigenvalue = es.eigenvalues().minCoeff();
  double scale = std::max(1.0, max_abs(plan.Sigma));
  rep.sigma_positive_definite = rep.sigma_min_eigenvalue > 1e-12 * scale;
  if (!rep.sigma_positive_definite) {
    rep.findings.push_back("limit covariance is not positive definite");
  }
  return rep;
}

PositiveDirection find_positive_direction(const StaticPlan& plan) {
  const int J = plan.spec.J;
  const int N = plan.Nrows();
  const int I = plan.spec.I;
  // variables (u, v, t), y = u - v
  const int n = 2 * J + 1;
  Vec c = Vec::Zero(n);
  c(2 * J) = -1.0;  // maximize t
  Mat ain(N + I + 2 * J, n);
  ain.setZero();
  Vec bin = Vec::Zero(N + I + 2 * J);
  // -K(u - v) <= 0
  ain.block(0, 0, N, J) = -plan.Kmat;
  ain.block(0, J, N, J) = plan.Kmat;
  // t 1 - R(u - v) <= 0
  ain.block(N, 0, I, J) = -plan.R;
  ain.block(N, J, I, J) = plan.R;
  ain.block(N, 2 * J, I, 1).setOnes();
  // u <= 1, v <= 1
  ain.block(N + I, 0, J, J).setIdentity();
  ain.block(N + I + J, J, J, J).setIdentity();
  bin.tail(2 * J).setOnes();

  LpResult lp = solve_lp(c, Mat(0, n), Vec(0), ain, bin);
  if (lp.status != LpStatus::Optimal) {
    throw DirectionNotFoundError("direction program did not solve");
  }
  double t = -lp.objective;
  if (t <= 1e-9) {
    throw DirectionNotFoundError(
        "no direction with K y >= 0 pushes all buffers up; the regulated "
        "dynamics cannot be driven into the interior");
  }
  Vec y = lp.x.head(J) - lp.x.segment(J, J);
  y /= y.norm();
  PositiveDirection out;
  out.y = y;
  out.margin = (plan.R * y).minCoeff();
  return out;
}

}  // namespace spnet
