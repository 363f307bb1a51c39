#include "spnet/bcp_eval.hpp"

#include <cmath>
#include <vector>

#include "spnet/brownian.hpp"
#include "spnet/errors.hpp"
#include "spnet/lp.hpp"

namespace spnet {

namespace {

// Sup-norm Lipschitz bounds of the reflection map for the tail estimate:
// regulator bounded by ||(I - |W|)^-1 diag(D)^-1||_inf, state by 1 + ||D|| Ly.
void reflection_lipschitz(const Mat& D, double* ly, double* lz) {
  const int d = static_cast<int>(D.rows());
  Vec dinv = D.diagonal().cwiseInverse();
  Mat W = Mat::Identity(d, d) - dinv.asDiagonal() * D;
  Mat absW = W.cwiseAbs();
  Mat S = (Mat::Identity(d, d) - absW).lu().solve(dinv.asDiagonal() * Mat::Identity(d, d));
  *ly = S.cwiseAbs().rowwise().sum().maxCoeff();
  *lz = 1.0 + D.cwiseAbs().rowwise().sum().maxCoeff() * (*ly);
}

}  // namespace

BCPCostEstimate evaluate_bcp_cost(const StaticPlan& plan,
                                  const JumpRuleControl& rule_in, const Vec& q,
                                  const CostParams& cost, double dt,
                                  double horizon, int reps, std::uint64_t seed,
                                  const BuildOptions& opt) {
  const int I = plan.spec.I;
  const int N = plan.Nrows();
  if (cost.gamma <= 0.0) throw InvalidParamsError("discount rate must be positive");
  if (cost.h.size() != I) throw InvalidParamsError("holding cost has wrong dimension");
  Vec p = cost.p.size() == 0 ? Vec(Vec::Zero(N)) : cost.p;
  if (p.size() != N) throw InvalidParamsError("pushing cost has wrong dimension");
  if (cost.h.minCoeff() < 0.0 || (p.size() > 0 && p.minCoeff() < 0.0)) {
    throw InvalidParamsError("cost rates must be nonnegative");
  }
  if (reps < 1) throw InvalidParamsError("need at least one replication");
  if (dt <= 0.0 || horizon <= 0.0 || horizon < rule_in.T - 1e-12) {
    throw InvalidParamsError("horizon must cover the review window");
  }
  if (q.size() != I || q.minCoeff() < 0.0) {
    throw InvalidParamsError("initial state must be nonnegative with dimension I");
  }

  JumpRuleControl rule = prepare_rule(plan, rule_in);
  const bool bridge = (I == 1);
  ZetaGenerator gen(q, plan.theta, plan.Sigma, dt, horizon, bridge, seed);
  const auto& times = gen.times();
  const auto& rn = gen.real_nodes();
  const int n_pts = static_cast<int>(times.size());
  const bool has_push = p.cwiseAbs().maxCoeff() > 0.0;
  const bool has_hold = cost.h.cwiseAbs().maxCoeff() > 0.0;

  std::vector<double> disc_all(n_pts);
  for (int k = 0; k < n_pts; ++k) disc_all[k] = std::exp(-cost.gamma * times[k]);

  double mean = 0.0, m2 = 0.0;
  double sum_hold = 0.0, sum_push = 0.0, sum_qT = 0.0;
  for (int r = 0; r < reps; ++r) {
    PiecewisePath zeta = gen.generate(r);
    RngStream jrng(seed, 0xA11E, static_cast<std::uint64_t>(r));
    ControlledPath cp = build_control(plan, rule, zeta, rn, &jrng, opt);

    double hold = 0.0;
    if (has_hold) {
      double g_prev = disc_all[rn[0]] * cost.h.dot(cp.Q.at(rn[0]));
      for (size_t k = 1; k < rn.size(); ++k) {
        double g = disc_all[rn[k]] * cost.h.dot(cp.Q.at(rn[k]));
        hold += 0.5 * (times[rn[k]] - times[rn[k - 1]]) * (g_prev + g);
        g_prev = g;
      }
    }
    double push = 0.0;
    if (has_push) {
      push = p.dot(cp.U.at(0));
      Vec u_prev = cp.U.at(0);
      for (int k = 1; k < n_pts; ++k) {
        Vec u = cp.U.at(k);
        push += disc_all[k] * p.dot(u - u_prev);
        u_prev = u;
      }
    }
    double total = hold + push;
    double delta = total - mean;
    mean += delta / (r + 1);
    m2 += delta * (total - mean);
    sum_hold += hold;
    sum_push += push;
    sum_qT += cp.Q.at(n_pts - 1).cwiseAbs().maxCoeff();
  }

  BCPCostEstimate est;
  est.mean = mean;
  est.reps = reps;
  est.se = reps > 1 ? std::sqrt(m2 / (reps - 1) / reps) : 0.0;
  est.mean_holding = sum_hold / reps;
  est.mean_pushing = sum_push / reps;

  double ly = 0.0, lz = 0.0;
  reflection_lipschitz(plan.D, &ly, &lz);
  double g = cost.gamma;
  double hbar = cost.h.sum();
  double pbar = p.sum();
  double drift = plan.theta.cwiseAbs().maxCoeff();
  double vol = std::sqrt(std::max(0.0, plan.Sigma.trace()));
  double growth = (sum_qT / reps) / g + drift / (g * g) +
                  vol * std::sqrt(M_PI) / (2.0 * std::pow(g, 1.5));
  est.tail_bound = std::exp(-g * horizon) * (hbar * lz + pbar * ly) * growth;
  return est;
}

EffectiveCost effective_cost(const StaticPlan& plan, const Vec& h,
                             const Vec& w) {
  const int I = plan.spec.I;
  const int L = plan.L();
  if (h.size() != I) throw InvalidParamsError("holding cost has wrong dimension");
  if (w.size() != L) throw InvalidParamsError("workload vector has wrong dimension");
  double nw = w.norm();
  if (nw > 1.0 + 1e-12) {
    EffectiveCost unit = effective_cost(plan, h, Vec(w / nw));
    unit.value *= nw;
    unit.minimizer *= nw;
    return unit;
  }
  LpResult res = solve_lp(h, plan.Lambda, w, Mat(0, I), Vec());
  if (res.status == LpStatus::Infeasible) {
    throw InfeasibleWorkloadError("no nonnegative state has workload " + format_vec(w));
  }
  if (res.status == LpStatus::Unbounded) {
    throw UnboundedLpError("effective cost unbounded below");
  }
  EffectiveCost out;
  out.value = res.objective;
  out.minimizer = res.x;
  return out;
}

double evaluate_ewf_cost(const StaticPlan& plan, const Vec& h, const Vec& p,
                         const PiecewisePath& U, const PiecewisePath& W,
                         double gamma) {
  if (gamma <= 0.0) throw InvalidParamsError("discount rate must be positive");
  if (!U.grid_ok() || !W.grid_ok()) throw InvalidParamsError("bad path grid");
  if (U.dim() != plan.Nrows()) throw InvalidParamsError("pushing path has wrong dimension");
  if (W.dim() != plan.L()) throw InvalidParamsError("workload path has wrong dimension");
  if (p.size() != plan.Nrows()) throw InvalidParamsError("pushing cost has wrong dimension");

  Vec u0 = U.at(0);
  if (u0.minCoeff() < -1e-12) throw InvalidParamsError("control starts negative");
  for (int k = 1; k < U.size(); ++k) {
    if ((U.at(k) - U.at(k - 1)).minCoeff() < -1e-12) {
      throw InvalidParamsError("control decreases at t = " + std::to_string(U.t[k]));
    }
  }

  double hold = 0.0;
  double g_prev = 0.0;
  for (int k = 0; k < W.size(); ++k) {
    double hw;
    try {
      hw = effective_cost(plan, h, W.at(k)).value;
    } catch (const InfeasibleWorkloadError&) {
      throw StateConstraintError("workload path leaves the feasible cone at t = " +
                                 std::to_string(W.t[k]));
    }
    double g = std::exp(-gamma * W.t[k]) * hw;
    if (k > 0) hold += 0.5 * (W.t[k] - W.t[k - 1]) * (g_prev + g);
    g_prev = g;
  }

  double push = p.dot(u0);
  for (int k = 1; k < U.size(); ++k) {
    push += std::exp(-gamma * U.t[k]) * p.dot(U.at(k) - U.at(k - 1));
  }
  return hold + push;
}

}  // namespace spnet
