#include "spnet/tracking.hpp"

#include <algorithm>
#include <cmath>

#include "spnet/errors.hpp"

namespace spnet {

ParamReport validate_params(const TrackingParams& params, double r,
                            const StaticPlan& plan, double lip_estimate) {
  ParamReport rep;
  rep.kappa_margin = params.kappa_exp * (1.0 + params.m_exp) - 3.0;
  rep.kappa_ok = params.kappa_exp > 0.0 && params.kappa_exp < 1.0 &&
                 rep.kappa_margin > 0.0;
  if (!rep.kappa_ok) {
    rep.findings.push_back(
        "need kappa in (0,1) with kappa (1 + m) - 2 > 1; margin " +
        std::to_string(rep.kappa_margin));
  }
  double beta_max = plan.scaling.beta.maxCoeff();
  rep.d1_margin = params.d1 - beta_max - 1.0;
  rep.d1_ok = rep.d1_margin > 0.0;
  if (!rep.d1_ok) {
    rep.findings.push_back("need d1 > max beta + 1 = " +
                           std::to_string(beta_max + 1.0));
  }
  double min_basic = std::numeric_limits<double>::infinity();
  for (int j = 0; j < plan.n_basic; ++j) min_basic = std::min(min_basic, plan.xstar(j));
  rep.stretch_margin =
      params.rho * min_basic - params.rule.M * (lip_estimate + 1.0);
  rep.stretch_ok = rep.stretch_margin > 0.0;
  if (!rep.stretch_ok) {
    rep.findings.push_back(
        "advisory: stretch rho min basic x* does not clear M (lip + 1); margin " +
        std::to_string(rep.stretch_margin));
  }
  rep.epoch_margin = r * params.rule.theta_g() - params.rho;
  rep.epoch_ok = rep.epoch_margin > 0.0;
  if (!rep.epoch_ok) {
    rep.findings.push_back("need r theta_g > rho; margin " +
                           std::to_string(rep.epoch_margin));
  }
  if (params.rho <= 0.0) {
    rep.epoch_ok = false;
    rep.findings.push_back("stretch length rho must be positive");
  }
  return rep;
}

SlotSchedule build_slots(const StaticPlan& plan, const TrackingParams& params,
                         double r, int epoch, const Vec& nu) {
  SlotSchedule s;
  s.delta = std::pow(r, params.kappa_exp);
  double r2tg = r * r * params.rule.theta_g();
  s.a = epoch * r2tg;
  s.b = s.a + r * params.rho;
  s.m1 = static_cast<int>(std::floor(r * params.rho / s.delta));
  s.m2 = static_cast<int>(std::floor((r2tg - r * params.rho) / s.delta));
  const int K = plan.Ksrv();
  s.phase1.resize(K);
  s.phase2.resize(K);
  for (int k = 0; k < K; ++k) {
    double off1 = 0.0, off2 = 0.0;
    for (int j : plan.spec.server_activities(k)) {
      double len1 = (plan.xstar(j) - nu(j) / params.rho) * s.delta;
      if (len1 < 0.0) {
        len1 = 0.0;
        s.clamped += 1;
      }
      if (off1 + len1 > s.delta) {
        len1 = s.delta - off1;
        s.clamped += 1;
      }
      s.phase1[k].push_back({j, off1, off1 + len1});
      off1 += len1;
      double len2 = plan.xstar(j) * s.delta;
      if (off2 + len2 > s.delta) len2 = std::max(0.0, s.delta - off2);
      s.phase2[k].push_back({j, off2, off2 + len2});
      off2 += len2;
    }
  }
  return s;
}

TrackingPolicy::TrackingPolicy(const StaticPlan& plan,
                               const TrackingParams& params, double r,
                               std::uint64_t seed)
    : plan_(plan),
      params_(params),
      r_(r),
      rng_(seed, 0xD001) {
  params_.rule = prepare_rule(plan, params_.rule);
  delta_ = std::pow(r, params_.kappa_exp);
  theta_big_ = params_.d1 * std::pow(r, params_.kappa_exp);
  r2tg_ = r * r * params_.rule.theta_g();
  ssr2_ = r * r * params_.rule.kappa_s();
  max_samples_ = params_.rule.p0 * params_.rule.j0;
  nu_ = Vec::Zero(plan.J());
  samples_.reserve(max_samples_);
}

void TrackingPolicy::advance_epochs(const SimObs& obs) {
  const double s = obs.s;
  double tol = 1e-9 * std::max(1.0, s);
  while (next_sample_ <= max_samples_ &&
         next_sample_ * ssr2_ <= s + tol) {
    // scaled netput relative to the start state, the review rule's input
    samples_.push_back(diffusion_netput(obs) - qhat0_);
    ++next_sample_;
  }
  while (epoch_ < params_.rule.p0 && (epoch_ + 1) * r2tg_ <= s + tol) {
    ++epoch_;
    double u = params_.rule.kind == RuleKind::Kernel ? rng_.uniform01() : 0.0;
    Vec nubar = rule_jump(params_.rule, plan_, epoch_, samples_, qhat0_, u);
    Vec qhat = obs.Q.cast<double>() / r_;
    nu_ = vartheta(plan_, qhat, nubar) + params_.rule.eps0 * params_.rule.y_star;
    sched_ = build_slots(plan_, params_, r_, epoch_, nu_);
    clamped_total_ += sched_.clamped;
  }
}

PolicyDecision TrackingPolicy::decide(const SimObs& obs) {
  const double s = obs.s;
  if (!started_) {
    started_ = true;
    qhat0_ = obs.q0.cast<double>() / r_;
    nu_ = params_.rule.eps0 * params_.rule.y_star;
    sched_ = build_slots(plan_, params_, r_, 0, nu_);
    clamped_total_ += sched_.clamped;
  }
  advance_epochs(obs);

  const double a_n = sched_.a;
  const double b_n = sched_.b;
  const bool phase2 = s >= b_n;
  const double feps = 1e-7;
  double sub_start;
  const std::vector<std::vector<Slot>>* slots;
  if (!phase2) {
    sub_start = a_n + std::floor((s - a_n) / delta_ + feps) * delta_;
    slots = &sched_.phase1;
  } else {
    sub_start = b_n + std::floor((s - b_n) / delta_ + feps) * delta_;
    slots = &sched_.phase2;
    long long sub_idx = static_cast<long long>(
        std::floor((s - b_n) / delta_ + feps));
    long long key = (static_cast<long long>(epoch_) << 32) + sub_idx;
    if (key != snap_key_) {
      snap_key_ = key;
      snap_q_ = obs.Q;
    }
  }
  double off = s - sub_start;
  double edge_eps = 1e-9 * delta_;

  PolicyDecision d;
  d.serve.assign(plan_.Ksrv(), -1);
  for (int k = 0; k < plan_.Ksrv(); ++k) {
    for (const Slot& sl : (*slots)[k]) {
      if (off >= sl.lo - edge_eps && off < sl.hi - edge_eps) {
        int buf = plan_.spec.buffer_of(sl.activity);
        bool open = obs.Q(buf) > 0;
        if (open && phase2) open = snap_q_(buf) > theta_big_;
        if (open) d.serve[k] = sl.activity;
        break;
      }
    }
  }

  // next declared boundary: slot edges, subinterval edges, the phase switch,
  // the next epoch, and the next netput sample time
  double gap = 1e-9 * std::max(1.0, s);
  double until = std::numeric_limits<double>::infinity();
  auto offer = [&](double c) {
    if (c > s + gap && c < until) until = c;
  };
  for (int k = 0; k < plan_.Ksrv(); ++k) {
    for (const Slot& sl : (*slots)[k]) {
      offer(sub_start + sl.lo);
      offer(sub_start + sl.hi);
    }
  }
  offer(sub_start + delta_);
  if (!phase2) offer(b_n);
  if (epoch_ < params_.rule.p0) offer((epoch_ + 1) * r2tg_);
  if (next_sample_ <= max_samples_) offer(next_sample_ * ssr2_);
  d.until = until;
  return d;
}

std::unique_ptr<TrackingPolicy> make_policy(const StaticPlan& plan,
                                            const TrackingParams& params,
                                            double r, std::uint64_t seed) {
  double lip = estimate_vartheta_lip(plan);
  ParamReport rep = validate_params(params, r, plan, lip);
  if (!rep.hard_ok()) {
    std::string msg = "tracking parameters rejected:";
    for (const auto& f : rep.findings) msg += " " + f + ";";
    throw InvalidParamsError(msg);
  }
  return std::make_unique<TrackingPolicy>(plan, params, r, seed);
}

}  // namespace spnet
