#include "spnet/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spnet/tracking.hpp"

namespace spnet {
namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* rule_name(RuleKind k) {
  switch (k) {
    case RuleKind::Zero: return "zero";
    case RuleKind::Threshold: return "threshold";
    case RuleKind::Kernel: return "kernel";
  }
  return "?";
}

CostParams resolved_cost(const SpecFileData& bundle, int I, int N) {
  CostParams cp;
  if (bundle.cost) cp = *bundle.cost;
  if (cp.h.size() == 0) cp.h = Vec::Ones(I);
  if (cp.p.size() == 0) cp.p = Vec::Zero(N);
  if (cp.h.size() != I) throw InvalidParamsError("holding cost has wrong dimension");
  if (cp.p.size() != N) throw InvalidParamsError("pushing cost has wrong dimension");
  return cp;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t base, int r_index, int rep) {
  std::uint64_t tag = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r_index)) << 32) |
                      static_cast<std::uint32_t>(rep);
  return mix64(base ^ mix64(tag));
}

std::string artifact_version() { return "0.1.0"; }

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << render_spec_file(cfg.bundle);
  os << "|r_list";
  for (double r : cfg.r_list) os << ' ' << num(r);
  os << "|reps " << cfg.reps << "|t_max " << num(cfg.t_max) << "|bcp_dt " << num(cfg.bcp_dt)
     << "|bcp_horizon " << num(cfg.bcp_horizon) << "|bcp_reps " << cfg.bcp_reps;
  return fnv1a(os.str());
}

std::string csv_header(const std::string& kind, std::uint64_t hash, std::uint64_t seed) {
  std::ostringstream os;
  os << "# spnet " << artifact_version() << ' ' << kind << " config=";
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hash << std::dec << " seed=" << seed << '\n';
  return os.str();
}

std::string trace_csv(const SimTrace& trace, const StaticPlan& plan,
                      const MaterializedNetwork& mat, const CostParams& cost,
                      std::uint64_t hash, std::uint64_t seed) {
  ScaledViews v = scale_views(trace, plan, mat);
  SimCost c = sim_cost(trace, plan, cost.h, cost.p, cost.gamma);
  std::ostringstream os;
  os << csv_header("simulate", hash, seed);
  os << "# r=" << num(trace.r) << " t_max=" << num(trace.t_max)
     << " events=" << trace.event_count << '\n';
  os << "# cost total=" << num(c.total) << " holding=" << num(c.holding)
     << " pushing=" << num(c.pushing) << " tail=" << num(c.tail)
     << " gamma=" << num(cost.gamma) << '\n';
  os << "# checks identity_residual=" << trace.checks.max_identity_residual
     << " max_idle_decrease=" << num(trace.checks.max_idle_decrease)
     << " contention_idles=" << trace.checks.contention_idles << '\n';
  os << "t";
  for (int i = 0; i < plan.I(); ++i) os << ",Qhat" << (i + 1);
  for (int n = 0; n < plan.Nrows(); ++n) os << ",Uhat" << (n + 1);
  for (int l = 0; l < plan.L(); ++l) os << ",What" << (l + 1);
  os << '\n';
  for (long g = 0; g < static_cast<long>(v.t.size()); ++g) {
    os << num(v.t[static_cast<size_t>(g)]);
    for (int i = 0; i < plan.I(); ++i) os << ',' << num(v.Qhat(g, i));
    for (int n = 0; n < plan.Nrows(); ++n) os << ',' << num(v.Uhat(g, n));
    for (int l = 0; l < plan.L(); ++l) os << ',' << num(v.What(g, l));
    os << '\n';
  }
  return os.str();
}

std::string bcp_csv(const BCPCostEstimate& est, const JumpRuleControl& rule,
                    const Vec& q, double gamma, std::uint64_t hash,
                    std::uint64_t seed) {
  std::ostringstream os;
  os << csv_header("bcp-eval", hash, seed);
  os << "rule,q,gamma,mean,se,reps,tail_bound\n";
  os << rule_name(rule.kind) << ',';
  for (int i = 0; i < q.size(); ++i) os << (i ? ";" : "") << num(q[i]);
  os << ',' << num(gamma) << ',' << num(est.mean) << ',' << num(est.se) << ','
     << est.reps << ',' << num(est.tail_bound) << '\n';
  return os.str();
}

ConvergenceReport run_convergence(const ExperimentConfig& cfg) {
  std::vector<double> r_list = cfg.r_list.empty() ? cfg.bundle.scaling.r_list : cfg.r_list;
  if (r_list.empty()) throw InvalidParamsError("convergence study needs a nonempty r_list");
  for (size_t i = 0; i + 1 < r_list.size(); ++i) {
    if (r_list[i] >= r_list[i + 1])
      throw InvalidParamsError("r_list must be strictly increasing");
  }
  if (r_list.front() <= 0) throw InvalidParamsError("scales must be positive");
  if (cfg.reps < 1) throw InvalidParamsError("need at least one replication per scale");
  if (!cfg.bundle.policy) throw InvalidParamsError("convergence study needs a [policy] section");

  StaticPlan plan = build_plan(cfg.bundle.spec, cfg.bundle.scaling, cfg.bundle.workload);
  TrackingParams params = *cfg.bundle.policy;
  CostParams cost = resolved_cost(cfg.bundle, plan.I(), plan.Nrows());

  const double t_max =
      cfg.t_max > 0 ? cfg.t_max : std::max(params.rule.T, 6.0 / cost.gamma);
  const double bcp_horizon =
      cfg.bcp_horizon > 0 ? cfg.bcp_horizon : std::max(params.rule.T, 6.0 / cost.gamma);
  if (t_max < params.rule.T)
    throw InvalidParamsError("sim horizon shorter than the review window T");

  ConvergenceReport rep;
  const std::uint64_t hash = config_hash(cfg);
  std::ostringstream table;
  table << csv_header("convergence", hash, cfg.seed);

  rep.bcp = evaluate_bcp_cost(plan, params.rule, cfg.bundle.scaling.q, cost, cfg.bcp_dt,
                              bcp_horizon, cfg.bcp_reps, mix64(cfg.seed ^ 0xbc9ec1ULL));
  table << "# bcp mean=" << num(rep.bcp.mean) << " se=" << num(rep.bcp.se)
        << " reps=" << rep.bcp.reps << " tail_bound=" << num(rep.bcp.tail_bound) << '\n';
  table << "r,mean,se,reps,gap\n";

  std::ofstream file;
  if (!cfg.out_csv.empty()) {
    file.open(cfg.out_csv);
    if (!file) throw SpnetError("cannot open output file: " + cfg.out_csv);
    file << table.str() << std::flush;
  }

  for (size_t ri = 0; ri < r_list.size(); ++ri) {
    const double r = r_list[ri];
    MaterializedNetwork mat = materialize(plan.spec, plan.scaling, r);
    double mean = 0.0, m2 = 0.0;
    for (int k = 0; k < cfg.reps; ++k) {
      std::uint64_t s = replication_seed(cfg.seed, static_cast<int>(ri), k);
      auto policy = make_policy(plan, params, r, s);
      SimTrace trace = run(plan.spec, mat, *policy, t_max, s);
      SimCost c = sim_cost(trace, plan, cost.h, cost.p, cost.gamma);
      double x = c.total + c.tail;
      double d = x - mean;
      mean += d / (k + 1);
      m2 += d * (x - mean);
    }
    RLevelResult row;
    row.r = r;
    row.mean = mean;
    row.se = cfg.reps > 1 ? std::sqrt(m2 / (cfg.reps - 1) / cfg.reps) : 0.0;
    row.reps = cfg.reps;
    row.gap = std::abs(mean - rep.bcp.mean);
    rep.rows.push_back(row);
    std::ostringstream line;
    line << num(row.r) << ',' << num(row.mean) << ',' << num(row.se) << ',' << row.reps
         << ',' << num(row.gap) << '\n';
    table << line.str();
    if (file.is_open()) file << line.str() << std::flush;
  }
  rep.csv = table.str();
  return rep;
}

}  // namespace spnet
