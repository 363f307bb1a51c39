#include "spnet/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spnet/errors.hpp"
#include "spnet/skorohod.hpp"

namespace spnet {

namespace {

bool lattice_member(const StaticPlan& plan, const IVec& b, double eta, double M,
                    std::string* why) {
  Vec bv = b.cast<double>();
  double norm = bv.norm() * eta;
  if (norm > M + 1e-12) {
    if (why) *why = "|b eta| = " + std::to_string(norm) + " exceeds M";
    return false;
  }
  Vec kb = plan.Kmat * bv;
  if (kb.size() > 0 && kb.minCoeff() < -1e-12) {
    if (why) *why = "Kmat b has a negative coordinate";
    return false;
  }
  return true;
}

}  // namespace

JumpRuleControl prepare_rule(const StaticPlan& plan, JumpRuleControl rule) {
  if (rule.T <= 0.0 || rule.p0 <= 0 || rule.j0 <= 0 || rule.eta <= 0.0 ||
      rule.M <= 0.0 || rule.eps0 < 0.0) {
    throw InvalidParamsError("jump rule needs T, p0, j0, eta, M > 0 and eps0 >= 0");
  }
  auto check = [&](const IVec& b, const char* what, size_t idx) {
    std::string why;
    if (static_cast<int>(b.size()) != plan.spec.J) {
      throw LatticeViolationError(std::string(what) + " row " +
                                  std::to_string(idx + 1) +
                                  ": jump has wrong dimension");
    }
    if (!lattice_member(plan, b, rule.eta, rule.M, &why)) {
      throw LatticeViolationError(std::string(what) + " row " +
                                  std::to_string(idx + 1) + ": " + why);
    }
  };
  for (size_t i = 0; i < rule.rows.size(); ++i) {
    check(rule.rows[i].b, "threshold", i);
    if (rule.rows[i].component < 0 || rule.rows[i].component >= plan.L()) {
      throw InvalidParamsError("threshold row tests a workload coordinate out of range");
    }
  }
  for (size_t i = 0; i < rule.kernel_rows.size(); ++i) {
    const auto& kr = rule.kernel_rows[i];
    if (kr.component < 0 || kr.component >= plan.L()) {
      throw InvalidParamsError("kernel row tests a workload coordinate out of range");
    }
    double sum = 0.0;
    for (const auto& o : kr.outcomes) {
      check(o.b, "kernel", i);
      if (o.prob < 0.0) {
        throw KernelNotStochasticError("kernel row has a negative probability");
      }
      sum += o.prob;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw KernelNotStochasticError("kernel row probabilities sum to " +
                                     std::to_string(sum));
    }
  }
  if (rule.eps0 > 0.0 && rule.y_star.size() == 0) {
    rule.y_star = find_positive_direction(plan).y;
  }
  if (rule.y_star.size() == 0) rule.y_star = Vec::Zero(plan.spec.J);
  return rule;
}

IVec sample_jump(const std::vector<LatticeJump>& outcomes, double u) {
  if (outcomes.empty()) throw KernelNotStochasticError("kernel row has no outcomes");
  std::vector<const LatticeJump*> order;
  order.reserve(outcomes.size());
  double sum = 0.0;
  for (const auto& o : outcomes) {
    if (o.prob < 0.0) {
      throw KernelNotStochasticError("kernel probability is negative");
    }
    sum += o.prob;
    order.push_back(&o);
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw KernelNotStochasticError("kernel probabilities sum to " +
                                   std::to_string(sum));
  }
  // canonical layout: consecutive subintervals of [0,1) in lexicographic order
  std::sort(order.begin(), order.end(),
            [](const LatticeJump* a, const LatticeJump* b) {
              for (int i = 0; i < std::min(a->b.size(), b->b.size()); ++i) {
                if (a->b(i) != b->b(i)) return a->b(i) < b->b(i);
              }
              return a->b.size() < b->b.size();
            });
  double acc = 0.0;
  for (const auto* o : order) {
    acc += o->prob;
    if (u < acc) return o->b;
  }
  return order.back()->b;  // u landed in roundoff slack at 1
}

namespace {

double quantize_down(double v, double step) {
  if (step <= 0.0) return v;
  return std::floor(v / step) * step;
}

}  // namespace

Vec rule_jump(const JumpRuleControl& rule, const StaticPlan& plan, int n,
              const std::vector<Vec>& x_samples, const Vec& q, double u) {
  const int J = plan.spec.J;
  if (rule.kind == RuleKind::Zero || n == 0) return Vec::Zero(J);

  // feature: workload of the free process at the most recent sample time
  double t_n = n * rule.theta_g();
  Vec x_last = x_samples.empty() ? Vec::Zero(plan.spec.I) : x_samples.back();
  Vec w = plan.Lambda * (q + plan.theta * t_n + x_last);
  for (int l = 0; l < w.size(); ++l) w(l) = quantize_down(w(l), rule.feature_quant);

  if (rule.kind == RuleKind::Threshold) {
    for (const auto& row : rule.rows) {
      if (w(row.component) >= row.threshold) {
        return row.b.cast<double>() * rule.eta;
      }
    }
    return Vec::Zero(J);
  }
  for (const auto& row : rule.kernel_rows) {
    if (w(row.component) >= row.threshold) {
      return sample_jump(row.outcomes, u).cast<double>() * rule.eta;
    }
  }
  return Vec::Zero(J);
}

Vec vartheta(const StaticPlan& plan, const Vec& q0, const Vec& y, int grid,
             double sp_tol) {
  const int J = plan.spec.J;
  if (y.cwiseAbs().maxCoeff() == 0.0) return Vec::Zero(J);
  Vec ry = plan.R * y;
  PiecewisePath x;
  x.interp = Interp::PiecewiseLinear;
  x.t.resize(grid + 1);
  x.values = Mat(grid + 1, plan.spec.I);
  for (int k = 0; k <= grid; ++k) {
    double s = static_cast<double>(k) / grid;
    x.t[k] = s;
    x.values.row(k) = (q0 + s * ry).transpose();
  }
  // the pre-jump state is nonnegative up to roundoff
  for (int i = 0; i < plan.spec.I; ++i) {
    if (x.values(0, i) < 0.0) {
      if (x.values(0, i) < -1e-9) {
        throw StateConstraintError("displacement map called from a negative state");
      }
      x.values(0, i) = 0.0;
    }
  }
  PiecewisePath gb = gamma_bar(plan, x, sp_tol);
  return y + gb.at(gb.size() - 1);
}

ControlledPath build_control(const StaticPlan& plan, const JumpRuleControl& rule_in,
                             const PiecewisePath& zeta,
                             const std::vector<int>& real_nodes,
                             RngStream* jump_rng, const BuildOptions& opt) {
  const int I = plan.spec.I;
  const int J = plan.spec.J;
  const int n_pts = zeta.size();
  if (!zeta.grid_ok()) throw SpnetError("driving path has a bad grid");
  if (zeta.dim() != I) throw SpnetError("driving path dimension mismatch");

  JumpRuleControl rule = rule_in;
  if (rule.eps0 > 0.0 && rule.y_star.size() == 0) {
    rule = prepare_rule(plan, rule);
  }
  if (rule.kind == RuleKind::Kernel && jump_rng == nullptr) {
    throw SpnetError("kernel rules need a jump RNG");
  }

  std::vector<int> nodes = real_nodes;
  if (nodes.empty()) {
    nodes.resize(n_pts);
    for (int k = 0; k < n_pts; ++k) nodes[k] = k;
  }
  double t_end = zeta.t.back();
  if (rule.T > t_end + 1e-9) {
    throw SpnetError("driving path is shorter than the review horizon T");
  }

  // locate epochs and noise-sample times among the real nodes
  auto locate = [&](double tt) -> int {
    int best = nodes[0];
    double err = std::abs(zeta.t[best] - tt);
    for (int idx : nodes) {
      double e = std::abs(zeta.t[idx] - tt);
      if (e < err) {
        best = idx;
        err = e;
      }
    }
    if (err > 1e-6 * std::max(1.0, tt) + 1e-12) {
      throw SpnetError("review epoch does not sit on the driving grid");
    }
    return best;
  };
  std::vector<int> epoch_idx(rule.p0 + 1);
  for (int n = 0; n <= rule.p0; ++n) epoch_idx[n] = locate(n * rule.theta_g());
  std::vector<int> sample_idx(static_cast<size_t>(rule.p0) * rule.j0);
  for (size_t l = 1; l <= sample_idx.size(); ++l) {
    sample_idx[l - 1] = locate(static_cast<double>(l) * rule.kappa_s());
  }

  const Vec q = zeta.at(0);
  ControlledPath out;
  out.Q.t = zeta.t;
  out.Q.interp = zeta.interp;
  out.Q.values = Mat::Zero(n_pts, I);
  out.Y.t = zeta.t;
  out.Y.interp = zeta.interp;
  out.Y.values = Mat::Zero(n_pts, J);

  std::vector<Vec> x_samples;  // centered free-process history for the rule
  x_samples.reserve(sample_idx.size());
  size_t next_sample = 0;

  Vec q_pre = q;
  Vec y_base = Vec::Zero(J);
  for (int n = 0; n <= rule.p0; ++n) {
    int i0 = epoch_idx[n];
    int i1 = (n < rule.p0) ? epoch_idx[n + 1] : n_pts - 1;
    while (next_sample < sample_idx.size() && sample_idx[next_sample] <= i0) {
      int si = sample_idx[next_sample];
      x_samples.push_back(zeta.at(si) - q - plan.theta * zeta.t[si]);
      ++next_sample;
    }
    Vec jump = Vec::Zero(J);
    if (n > 0) {
      double u = (rule.kind == RuleKind::Kernel) ? jump_rng->uniform01() : 0.0;
      jump = rule_jump(rule, plan, n, x_samples, q, u);
    }
    Vec dy = vartheta(plan, q_pre, jump, opt.vartheta_grid, opt.sp_tol);
    if (rule.eps0 > 0.0) dy += rule.eps0 * rule.y_star;

    Vec y_jump = y_base + dy;
    Vec q_jump = q_pre + plan.R * dy;
    for (int i = 0; i < I; ++i) {
      if (q_jump(i) < 0.0) {
        if (q_jump(i) < -1e-9) {
          throw StateConstraintError("state left the orthant at a review epoch");
        }
        q_jump(i) = 0.0;
      }
    }

    if (i1 > i0) {
      PiecewisePath seg;
      seg.interp = zeta.interp;
      seg.t.assign(zeta.t.begin() + i0, zeta.t.begin() + i1 + 1);
      seg.values = zeta.values.middleRows(i0, i1 - i0 + 1);
      Vec base = zeta.at(i0);
      for (int k = 0; k < seg.values.rows(); ++k) {
        seg.values.row(k) += (q_jump - base).transpose();
      }
      SPSolution sp = solve_sp(seg, plan.D, opt.sp_tol, opt.sp_max_sweeps);
      Mat shift = plan.xstar.asDiagonal() * plan.spec.C.cast<double>().transpose();
      out.Q.values.middleRows(i0, i1 - i0 + 1) = sp.z.values;
      out.Y.values.middleRows(i0, i1 - i0 + 1) =
          (sp.y.values * shift.transpose()).rowwise() + y_jump.transpose();
      q_pre = out.Q.at(i1);
      y_base = out.Y.at(i1);
    } else {
      out.Q.values.row(i0) = q_jump.transpose();
      out.Y.values.row(i0) = y_jump.transpose();
      q_pre = q_jump;
      y_base = y_jump;
    }
  }

  out.U.t = zeta.t;
  out.U.interp = zeta.interp;
  out.U.values = out.Y.values * plan.Kmat.transpose();
  return out;
}

double estimate_vartheta_lip(const StaticPlan& plan, int n_probes,
                             uint64_t seed) {
  const int I = plan.spec.I;
  const int J = plan.spec.J;
  RngStream rng(seed, 0x71B5);
  double best = 1.0;
  for (int it = 0; it < n_probes; ++it) {
    Vec q0(I);
    for (int i = 0; i < I; ++i) q0(i) = 2.0 * rng.uniform01();
    Vec y(J);
    for (int j = 0; j < J; ++j) y(j) = 2.0 * rng.uniform01() - 1.0;
    Vec ky = plan.Kmat * y;
    if (ky.size() > 0 && ky.minCoeff() < 0.0) {
      // project crudely into the admissible cone by mixing with y_star-like
      // all-positive allocations; skip when that fails
      Vec pos = Vec::Ones(J);
      double lo = 0.0, hi = 1.0;
      for (int b = 0; b < 30; ++b) {
        double mid = 0.5 * (lo + hi);
        Vec cand = (1.0 - mid) * y + mid * pos;
        if ((plan.Kmat * cand).minCoeff() >= 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      y = (1.0 - hi) * y + hi * pos;
      if ((plan.Kmat * y).minCoeff() < -1e-9) continue;
    }
    double ny = y.norm();
    if (ny < 1e-9) continue;
    Vec v = vartheta(plan, q0, y, 64, 1e-10);
    best = std::max(best, v.norm() / ny);
  }
  return best;
}

std::vector<Vec> discretize_control(const PiecewisePath& Y, int p0, double eta,
                                    double M, int n0) {
  if (!Y.grid_ok()) throw SpnetError("control path has a bad grid");
  if (p0 <= 0 || eta <= 0.0 || M <= 0.0) {
    throw InvalidParamsError("discretization needs p0 > 0, eta > 0, M > 0");
  }
  const int J = Y.dim();
  const double T = Y.t.back();
  const double theta = T / p0;

  // prefix integrals for the running-average smoother
  std::vector<Vec> prefix;
  if (n0 > 0) {
    prefix.assign(Y.size(), Vec::Zero(J));
    for (int k = 1; k < Y.size(); ++k) {
      double dt = Y.t[k] - Y.t[k - 1];
      Vec seg = (Y.interp == Interp::PiecewiseLinear)
                    ? Vec(0.5 * dt * (Y.at(k - 1) + Y.at(k)))
                    : Vec(dt * Y.at(k - 1));
      prefix[k] = prefix[k - 1] + seg;
    }
  }
  auto integral_to = [&](double tt) -> Vec {
    if (tt <= Y.t.front()) return Vec::Zero(J);
    if (tt >= Y.t.back()) return prefix.back();
    auto it = std::upper_bound(Y.t.begin(), Y.t.end(), tt);
    int k = static_cast<int>(it - Y.t.begin()) - 1;
    double dt = tt - Y.t[k];
    if (Y.interp == Interp::PiecewiseLinear) {
      Vec yk = Y.at(k);
      Vec slope = (Y.at(k + 1) - yk) / (Y.t[k + 1] - Y.t[k]);
      return prefix[k] + dt * (yk + 0.5 * dt * slope);
    }
    return prefix[k] + dt * Y.at(k);
  };
  auto smoothed = [&](double tt) -> Vec {
    if (n0 <= 0) return Y.eval(tt);
    double lo = std::max(0.0, tt - 1.0 / n0);
    return static_cast<double>(n0) * (integral_to(tt) - integral_to(lo));
  };

  std::vector<Vec> jumps(p0 + 1, Vec::Zero(J));
  Vec prev = Vec::Zero(J);
  for (int n = 0; n <= p0; ++n) {
    Vec cur = smoothed(n * theta);
    Vec inc = cur - prev;
    prev = cur;
    IVec b(J);
    for (int j = 0; j < J; ++j) {
      b(j) = static_cast<int>(std::ceil(inc(j) / eta - 1e-9));
    }
    Vec jump = b.cast<double>() * eta;
    if (jump.norm() > M + 1e-12) jump.setZero();
    jumps[n] = jump;
  }
  return jumps;
}

}  // namespace spnet
