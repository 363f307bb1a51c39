// Command-line front end: analyze a network file, simulate it at one scale,
// price a jump rule against the diffusion model, or sweep scales for a
// convergence table. Exit codes: 0 ok, 2 input/validation problem, 1 runtime
// failure.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spnet/examples.hpp"
#include "spnet/experiment.hpp"
#include "spnet/tracking.hpp"

namespace {

using namespace spnet;

struct InputArgs {
  std::string spec_path;
  std::string example;
};

SpecFileData load_input(const InputArgs& in) {
  if (!in.spec_path.empty() && !in.example.empty())
    throw InvalidParamsError("pass either --spec or --example, not both");
  if (!in.spec_path.empty()) return load_spec_file(in.spec_path);
  if (!in.example.empty()) return load_example(in.example);
  throw InvalidParamsError("pass --spec FILE or --example NAME");
}

void add_input_flags(CLI::App* cmd, InputArgs* in) {
  cmd->add_option("--spec", in->spec_path, "network description file");
  cmd->add_option("--example", in->example, "built-in example name");
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw SpnetError("cannot open output file: " + out);
  f << text;
}

std::string fmt_vec(const Vec& v) { return format_vec(v); }

int cmd_examples(const std::string& name, const std::string& out_dir) {
  if (name.empty() && out_dir.empty()) {
    for (const auto& n : example_names()) std::cout << n << '\n';
    return 0;
  }
  if (!name.empty()) {
    std::cout << render_spec_file(load_example(name));
    return 0;
  }
  for (const auto& n : example_names()) {
    std::string path = out_dir + "/" + n + ".spnet";
    std::ofstream f(path);
    if (!f) throw SpnetError("cannot open output file: " + path);
    f << render_spec_file(load_example(n));
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

int cmd_analyze(const InputArgs& in) {
  SpecFileData d = load_input(in);
  StaticPlan plan = build_plan(d.spec, d.scaling, d.workload);
  std::cout << "network: I=" << plan.I() << " J=" << plan.J() << " K=" << plan.Ksrv()
            << "  basic=" << plan.n_basic << "  L=" << plan.L() << " N=" << plan.Nrows()
            << '\n';
  std::cout << "rho* = " << plan.rho_star << (plan.heavy_traffic ? "  (heavy traffic)" : "")
            << (plan.lp_unique ? "" : "  [non-unique allocation]") << '\n';
  std::cout << "x* = " << fmt_vec(plan.xstar) << '\n';
  std::cout << "theta = " << fmt_vec(plan.theta) << '\n';
  std::cout << "gamma* = " << fmt_vec(plan.gamma_star) << '\n';
  std::cout << "R =\n" << format_mat(plan.R) << '\n';
  std::cout << "K =\n" << format_mat(plan.Kmat) << '\n';
  std::cout << "Lambda =\n" << format_mat(plan.Lambda) << '\n';
  std::cout << "G =\n" << format_mat(plan.G) << '\n';
  std::cout << "Sigma =\n" << format_mat(plan.Sigma) << '\n';
  std::cout << "D =\n" << format_mat(plan.D) << '\n';
  std::cout << "workload identity exact: " << (plan.workload_exact ? "yes" : "no") << '\n';
  for (const auto& n : plan.notes) std::cout << "note: " << n << '\n';

  AssumptionReport ar = check_assumptions(plan);
  std::cout << "assumptions: heavy_traffic=" << (ar.heavy_traffic ? "pass" : "FAIL")
            << " basic_cover=" << (ar.buffers_have_basic_activity ? "pass" : "FAIL")
            << " workload_bound=" << (ar.workload_lower_bound ? "pass" : "FAIL") << " (c="
            << ar.workload_lower_bound_c << ")"
            << " reflection=" << (ar.reflection_structure ? "pass" : "FAIL")
            << " sigma_pd=" << (ar.sigma_positive_definite ? "pass" : "FAIL") << " (min eig="
            << ar.sigma_min_eigenvalue << ")" << '\n';
  for (const auto& f : ar.findings) std::cout << "finding: " << f << '\n';
  try {
    PositiveDirection yd = find_positive_direction(plan);
    std::cout << "interior direction margin = " << yd.margin << ", y = " << fmt_vec(yd.y)
              << '\n';
  } catch (const DirectionNotFoundError& e) {
    std::cout << "interior direction: none (" << e.what() << ")\n";
  }
  return ar.all_ok() ? 0 : 1;
}

int cmd_simulate(const InputArgs& in, double r, std::uint64_t seed, double horizon,
                 const std::string& policy_name, const std::string& out) {
  SpecFileData d = load_input(in);
  StaticPlan plan = build_plan(d.spec, d.scaling, d.workload);
  MaterializedNetwork mat = materialize(plan.spec, plan.scaling, r);
  CostParams cost;
  if (d.cost) cost = *d.cost;
  if (cost.h.size() == 0) cost.h = Vec::Ones(plan.I());
  if (cost.p.size() == 0) cost.p = Vec::Zero(plan.Nrows());

  double t_max = horizon > 0 ? horizon : 6.0 / cost.gamma;
  SimTrace trace;
  if (policy_name == "work-conserving") {
    WorkConservingPolicy wc;
    trace = run(plan.spec, mat, wc, t_max, seed);
  } else if (policy_name == "tracking") {
    if (!d.policy) throw InvalidParamsError("tracking policy needs a [policy] section");
    auto pol = make_policy(plan, *d.policy, r, seed);
    trace = run(plan.spec, mat, *pol, t_max, seed);
  } else {
    throw InvalidParamsError("unknown policy: " + policy_name);
  }

  ExperimentConfig hcfg;
  hcfg.bundle = d;
  hcfg.t_max = t_max;
  write_or_print(out, trace_csv(trace, plan, mat, cost, config_hash(hcfg), seed));
  return 0;
}

int cmd_bcp_eval(const InputArgs& in, std::vector<double> q_in, double gamma_in, double dt,
                 double horizon, int reps, std::uint64_t seed, const std::string& out) {
  SpecFileData d = load_input(in);
  StaticPlan plan = build_plan(d.spec, d.scaling, d.workload);
  JumpRuleControl rule;
  if (d.policy) rule = d.policy->rule;
  CostParams cost;
  if (d.cost) cost = *d.cost;
  if (cost.h.size() == 0) cost.h = Vec::Ones(plan.I());
  if (cost.p.size() == 0) cost.p = Vec::Zero(plan.Nrows());
  if (gamma_in > 0) cost.gamma = gamma_in;

  Vec q = plan.scaling.q;
  if (!q_in.empty()) {
    if (static_cast<int>(q_in.size()) != plan.I())
      throw InvalidParamsError("--q needs one value per buffer");
    q = Vec(plan.I());
    for (int i = 0; i < plan.I(); ++i) q[i] = q_in[static_cast<size_t>(i)];
  }
  double hz = horizon > 0 ? horizon : std::max(rule.T, 6.0 / cost.gamma);
  BCPCostEstimate est = evaluate_bcp_cost(plan, rule, q, cost, dt, hz, reps, seed);

  ExperimentConfig hcfg;
  hcfg.bundle = d;
  hcfg.bcp_dt = dt;
  hcfg.bcp_horizon = hz;
  hcfg.bcp_reps = reps;
  write_or_print(out, bcp_csv(est, rule, q, cost.gamma, config_hash(hcfg), seed));
  return 0;
}

int cmd_converge(const InputArgs& in, const std::vector<double>& r_list, int reps,
                 std::uint64_t seed, double gamma_in, double horizon,
                 const std::string& out) {
  ExperimentConfig cfg;
  cfg.bundle = load_input(in);
  cfg.r_list = r_list;
  cfg.reps = reps;
  cfg.seed = seed;
  cfg.t_max = horizon;
  cfg.out_csv = out;
  if (gamma_in > 0) {
    if (!cfg.bundle.cost) {
      cfg.bundle.cost = CostParams{};
      cfg.bundle.cost->h = Vec::Ones(cfg.bundle.spec.I);
    }
    cfg.bundle.cost->gamma = gamma_in;
  }
  ConvergenceReport rep = run_convergence(cfg);
  if (out.empty()) {
    std::cout << rep.csv;
  } else {
    std::cout << "bcp value " << rep.bcp.mean << " (se " << rep.bcp.se << "); wrote " << out
              << '\n';
  }
  return 0;
}

bool validation_error(const std::exception& e) {
  return dynamic_cast<const ParseError*>(&e) || dynamic_cast<const InvalidParamsError*>(&e) ||
         dynamic_cast<const UnknownExampleError*>(&e) ||
         dynamic_cast<const LatticeViolationError*>(&e) ||
         dynamic_cast<const KernelNotStochasticError*>(&e) ||
         dynamic_cast<const NegativeRateError*>(&e) ||
         dynamic_cast<const WorkloadUnavailableError*>(&e) ||
         dynamic_cast<const WorkloadInconsistentError*>(&e) ||
         dynamic_cast<const InfeasibleLpError*>(&e) ||
         dynamic_cast<const UnboundedLpError*>(&e) || dynamic_cast<const NotPsdError*>(&e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavy-traffic queueing network toolkit"};
  app.require_subcommand(1);

  InputArgs in;
  std::string name, out;
  double r = 10.0, gamma = 0.0, horizon = 0.0, dt = 1e-3;
  std::uint64_t seed = 1;
  int reps = 20;
  std::string policy_name = "tracking";
  std::vector<double> r_list;
  std::vector<double> q_in;

  auto* ex = app.add_subcommand("examples", "list or export the built-in networks");
  ex->add_option("--name", name, "print one example's spec file");
  ex->add_option("--out", out, "write every example to DIR/<name>.spnet");

  auto* an = app.add_subcommand("analyze", "solve the static plan and check assumptions");
  add_input_flags(an, &in);

  auto* si = app.add_subcommand("simulate", "run one discrete-event replication");
  add_input_flags(si, &in);
  si->add_option("--r", r, "scale parameter")->check(CLI::PositiveNumber);
  si->add_option("--seed", seed, "rng seed");
  si->add_option("--horizon", horizon, "diffusion-clock horizon");
  si->add_option("--policy", policy_name, "tracking | work-conserving");
  si->add_option("--out", out, "csv output path (default stdout)");

  auto* be = app.add_subcommand("bcp-eval", "Monte Carlo value of the jump rule");
  add_input_flags(be, &in);
  be->add_option("--q", q_in, "initial diffusion state")->delimiter(',');
  be->add_option("--gamma", gamma, "discount override");
  be->add_option("--dt", dt, "path step")->check(CLI::PositiveNumber);
  be->add_option("--horizon", horizon, "quadrature horizon");
  be->add_option("--reps", reps, "replications")->check(CLI::PositiveNumber);
  be->add_option("--seed", seed, "rng seed");
  be->add_option("--out", out, "csv output path (default stdout)");

  auto* cv = app.add_subcommand("converge", "cost gap table over a scale sweep");
  add_input_flags(cv, &in);
  cv->add_option("--r-list", r_list, "scales, comma separated")->delimiter(',');
  cv->add_option("--reps", reps, "sim replications per scale")->check(CLI::PositiveNumber);
  cv->add_option("--seed", seed, "rng seed");
  cv->add_option("--gamma", gamma, "discount override");
  cv->add_option("--horizon", horizon, "sim horizon (diffusion clock)");
  cv->add_option("--out", out, "csv output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ex->parsed()) return cmd_examples(name, out);
    if (an->parsed()) return cmd_analyze(in);
    if (si->parsed()) return cmd_simulate(in, r, seed, horizon, policy_name, out);
    if (be->parsed()) return cmd_bcp_eval(in, q_in, gamma, dt, horizon, reps, seed, out);
    if (cv->parsed()) return cmd_converge(in, r_list, reps, seed, gamma, horizon, out);
  } catch (const SpnetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return validation_error(e) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
