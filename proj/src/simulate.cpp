#include "spnet/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "spnet/errors.hpp"
#include "spnet/rng.hpp"

namespace spnet {

PolicyDecision WorkConservingPolicy::decide(const SimObs& obs) {
  PolicyDecision d;
  d.serve.assign(obs.spec.K, -1);
  for (int k = 0; k < obs.spec.K; ++k) {
    for (int j : obs.spec.server_activities(k)) {
      int i = obs.spec.buffer_of(j);
      if (obs.busy[j] || obs.Q(i) - obs.claimed(i) > 0) {
        d.serve[k] = j;
        break;
      }
    }
  }
  return d;
}

Vec diffusion_netput(const SimObs& obs) {
  const NetworkSpec& spec = obs.spec;
  const double r = obs.r;
  Vec xhat = obs.q0.cast<double>() / r;
  for (int i = 0; i < spec.I; ++i) {
    xhat(i) += (obs.E(i) - obs.mat.alpha_r(i) * obs.s) / r;
  }
  for (int j = 0; j < spec.J; ++j) {
    double shat = (obs.S(j) - obs.mat.beta_r(j) * obs.T(j)) / r;
    int bj = spec.buffer_of(j);
    xhat(bj) -= shat;
    for (int i = 0; i < spec.I; ++i) {
      double pji = spec.routing(j, i + 1);
      xhat(i) += pji * shat;                       // routed share of the centering
      xhat(i) += (obs.Phi(j, i) - pji * obs.S(j)) / r;  // routing fluctuation
    }
  }
  return xhat;
}

namespace {

enum EventType { kArrival = 0, kCompletion = 1, kBoundary = 2, kHorizon = 3 };

}  // namespace

SimTrace run(const NetworkSpec& spec, const MaterializedNetwork& mat,
             Policy& policy, double t_max, std::uint64_t seed, int out_points) {
  ValidationReport vr = validate_spec(spec);
  if (!vr.ok()) throw SpnetError("invalid network: " + vr.joined());
  if (t_max <= 0.0 || out_points < 2) {
    throw InvalidParamsError("need t_max > 0 and at least two output points");
  }
  const int I = spec.I, J = spec.J, K = spec.K;
  const double r = mat.r;
  const double s_end = r * r * t_max;
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<RngStream> arr_rng, svc_rng, rte_rng;
  arr_rng.reserve(I);
  svc_rng.reserve(J);
  rte_rng.reserve(J);
  for (int i = 0; i < I; ++i) arr_rng.emplace_back(seed, 0xA001, i);
  for (int j = 0; j < J; ++j) svc_rng.emplace_back(seed, 0xB001, j);
  for (int j = 0; j < J; ++j) rte_rng.emplace_back(seed, 0xC001, j);

  IVec Q = mat.q_r;
  IVec claimed = IVec::Zero(I);
  std::vector<char> busy(J, 0);
  Vec T = Vec::Zero(J);
  Vec remaining = Vec::Zero(J);
  IVec E = IVec::Zero(I);
  IVec S = IVec::Zero(J);
  IMat Phi = IMat::Zero(J, I);
  Vec idle = Vec::Zero(K);
  std::vector<double> next_arrival(I, inf);
  for (int i = 0; i < I; ++i) {
    if (mat.arrival[i].family != PrimitiveFamily::None) {
      next_arrival[i] = mat.arrival[i].sample(arr_rng[i]);
    }
  }

  SimTrace trace;
  trace.r = r;
  trace.t_max = t_max;
  trace.q0 = mat.q_r;
  trace.t_grid.resize(out_points);
  for (int g = 0; g < out_points; ++g) {
    trace.t_grid[g] = t_max * g / (out_points - 1);
  }
  trace.segments.reserve(1024);

  double clock = 0.0;
  int next_grid = 0;

  auto make_obs = [&]() {
    return SimObs{clock, r, Q, claimed, busy, T, E, S, Phi, mat.q_r, spec, mat};
  };

  auto apply_decision = [&](PolicyDecision d) -> PolicyDecision {
    if (static_cast<int>(d.serve.size()) != K) {
      throw PolicyInfeasibleError("decision must cover every server");
    }
    for (int k = 0; k < K; ++k) {
      int j = d.serve[k];
      if (j < 0) continue;
      if (j >= J || spec.server_of(j) != k) {
        throw PolicyInfeasibleError("server " + std::to_string(k + 1) +
                                    " cannot run activity " + std::to_string(j + 1));
      }
      int i = spec.buffer_of(j);
      if (busy[j]) continue;  // resume the preempted job
      if (Q(i) == 0) {
        throw PolicyInfeasibleError("activity " + std::to_string(j + 1) +
                                    " asked to serve empty buffer " +
                                    std::to_string(i + 1));
      }
      if (Q(i) - claimed(i) > 0) {
        busy[j] = 1;
        claimed(i) += 1;
        remaining(j) = mat.service[j].sample(svc_rng[j]);
      } else {
        d.serve[k] = -1;  // every job claimed elsewhere; forced idle
        trace.checks.contention_idles += 1;
      }
    }
    if (!(d.until > clock)) {
      throw PolicyInfeasibleError("policy boundary must lie strictly ahead");
    }
    return d;
  };

  auto identity_check = [&]() {
    for (int i = 0; i < I; ++i) {
      long long rhs = mat.q_r(i) + E(i);
      for (int j = 0; j < J; ++j) {
        rhs -= static_cast<long long>(spec.C(i, j)) * S(j);
        rhs += Phi(j, i);
      }
      long long res = std::llabs(static_cast<long long>(Q(i)) - rhs);
      trace.checks.max_identity_residual =
          std::max(trace.checks.max_identity_residual, res);
    }
  };

  auto record_grid = [&](double upto, const std::vector<int>& serve) {
    while (next_grid < out_points) {
      double s_g = trace.t_grid[next_grid] * r * r;
      if (s_g > upto + 1e-9 * std::max(1.0, upto)) break;
      double ds = std::max(0.0, s_g - clock);
      Vec t_rec = T;
      Vec i_rec = idle;
      for (int k = 0; k < K; ++k) {
        int j = serve[k];
        if (j >= 0) {
          t_rec(j) += ds;
        } else {
          i_rec(k) += ds;
        }
      }
      trace.Q_samples.push_back(Q);
      trace.T_samples.push_back(t_rec);
      trace.E_samples.push_back(E);
      trace.S_samples.push_back(S);
      trace.I_samples.push_back(i_rec);
      ++next_grid;
    }
  };

  PolicyDecision dec = apply_decision(policy.decide(make_obs()));
  trace.checks.policy_calls += 1;
  record_grid(0.0, dec.serve);

  while (clock < s_end) {
    double t_next = s_end;
    int type = kHorizon;
    int who = -1;
    for (int i = 0; i < I; ++i) {
      if (next_arrival[i] < t_next) {
        t_next = next_arrival[i];
        type = kArrival;
        who = i;
      }
    }
    for (int k = 0; k < K; ++k) {
      int j = dec.serve[k];
      if (j >= 0 && busy[j]) {
        double tc = clock + remaining(j);
        if (tc < t_next) {
          t_next = tc;
          type = kCompletion;
          who = j;
        }
      }
    }
    if (dec.until < t_next) {
      t_next = dec.until;
      type = kBoundary;
      who = -1;
    }
    if (t_next > s_end) {
      t_next = s_end;
      type = kHorizon;
      who = -1;
    }

    record_grid(t_next, dec.serve);
    double ds = t_next - clock;
    if (ds > 0.0) {
      std::uint64_t mask = 0;
      for (int k = 0; k < K; ++k) {
        int j = dec.serve[k];
        if (j >= 0) {
          mask |= (std::uint64_t{1} << j);
          T(j) += ds;
          if (busy[j]) remaining(j) = std::max(0.0, remaining(j) - ds);
        } else {
          idle(k) += ds;
        }
      }
      TraceSegment seg;
      seg.s0 = clock;
      seg.s1 = t_next;
      seg.q = Q;
      seg.alloc = mask;
      trace.segments.push_back(std::move(seg));
    }
    clock = t_next;
    if (type == kHorizon) break;

    if (type == kArrival) {
      Q(who) += 1;
      E(who) += 1;
      next_arrival[who] = clock + mat.arrival[who].sample(arr_rng[who]);
      trace.event_count += 1;
    } else if (type == kCompletion) {
      int i = spec.buffer_of(who);
      busy[who] = 0;
      claimed(i) -= 1;
      Q(i) -= 1;
      S(who) += 1;
      double u = rte_rng[who].uniform01();
      double acc = spec.routing(who, 0);
      int target = 0;  // 0 = leaves the network
      while (target < I && u >= acc) {
        target += 1;
        acc += spec.routing(who, target);
      }
      if (target > 0) {
        Q(target - 1) += 1;
        Phi(who, target - 1) += 1;
      }
      trace.event_count += 1;
    } else {
      trace.event_count += 1;  // declared policy boundary
    }

    identity_check();
    for (int k = 0; k < K; ++k) {
      double lhs = idle(k);
      double rhs = clock;
      for (int j : spec.server_activities(k)) rhs -= T(j);
      trace.checks.idle_identity_residual = std::max(
          trace.checks.idle_identity_residual, std::abs(lhs - rhs));
    }

    dec = apply_decision(policy.decide(make_obs()));
    trace.checks.policy_calls += 1;
  }

  record_grid(s_end, dec.serve);
  return trace;
}

SimCost sim_cost(const SimTrace& trace, const StaticPlan& plan, const Vec& h,
                 const Vec& p, double gamma) {
  if (gamma <= 0.0) throw InvalidParamsError("discount rate must be positive");
  const int I = plan.I();
  if (h.size() != I) throw InvalidParamsError("holding cost has wrong dimension");
  Vec pp = p.size() == 0 ? Vec(Vec::Zero(plan.Nrows())) : p;
  if (pp.size() != plan.Nrows()) {
    throw InvalidParamsError("pushing cost has wrong dimension");
  }
  const double r = trace.r;
  const double r2 = r * r;
  Vec kx = plan.Kmat * plan.xstar;
  Vec ka_cache = Vec::Zero(plan.Nrows());

  SimCost out;
  for (const auto& seg : trace.segments) {
    double t0 = seg.s0 / r2, t1 = seg.s1 / r2;
    double wdisc = (std::exp(-gamma * t0) - std::exp(-gamma * t1)) / gamma;
    out.holding += wdisc * h.dot(seg.q.cast<double>()) / r;
    if (pp.cwiseAbs().maxCoeff() > 0.0) {
      ka_cache.setZero();
      for (int j = 0; j < plan.J(); ++j) {
        if (seg.alloc & (std::uint64_t{1} << j)) ka_cache += plan.Kmat.col(j);
      }
      // dU^/dt = r (K x* - K a) while the allocation vector a is constant
      out.pushing += wdisc * r * pp.dot(kx - ka_cache);
    }
  }
  out.total = out.holding + out.pushing;
  if (!trace.Q_samples.empty()) {
    double hq_end = h.dot(trace.Q_samples.back().cast<double>()) / r;
    out.tail = std::exp(-gamma * trace.t_max) * hq_end / gamma;
  }
  return out;
}

ScaledViews scale_views(const SimTrace& trace, const StaticPlan& plan,
                        const MaterializedNetwork& mat) {
  const int I = plan.I(), J = plan.J(), K = plan.Ksrv();
  const int n = static_cast<int>(trace.t_grid.size());
  if (static_cast<int>(trace.Q_samples.size()) != n) {
    throw SpnetError("trace is missing grid samples");
  }
  const double r = trace.r;
  const double r2 = r * r;
  ScaledViews v;
  v.t = trace.t_grid;
  v.Qhat = Mat(n, I);
  v.Qbar = Mat(n, I);
  v.Tbar = Mat(n, J);
  v.Yhat = Mat(n, J);
  v.Ehat = Mat(n, I);
  v.Shat = Mat(n, J);
  v.Ihat = Mat(n, K);
  for (int g = 0; g < n; ++g) {
    double s = trace.t_grid[g] * r2;
    Vec q = trace.Q_samples[g].cast<double>();
    Vec T = trace.T_samples[g];
    v.Qhat.row(g) = (q / r).transpose();
    v.Qbar.row(g) = (q / r2).transpose();
    v.Tbar.row(g) = (T / r2).transpose();
    v.Yhat.row(g) = ((plan.xstar * s - T) / r).transpose();
    for (int i = 0; i < I; ++i) {
      v.Ehat(g, i) = (trace.E_samples[g](i) - mat.alpha_r(i) * s) / r;
    }
    for (int j = 0; j < J; ++j) {
      v.Shat(g, j) = (trace.S_samples[g](j) - mat.beta_r(j) * T(j)) / r;
    }
    v.Ihat.row(g) = (trace.I_samples[g] / r).transpose();
  }
  v.Uhat = v.Yhat * plan.Kmat.transpose();
  v.What = v.Qhat * plan.Lambda.transpose();
  return v;
}

}  // namespace spnet
