#include "spnet/examples.hpp"

namespace spnet {
namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

IMat imat(int rows, int cols, std::initializer_list<int> xs) {
  IMat m(rows, cols);
  long k = 0;
  for (int x : xs) m(k / cols, k % cols) = x, ++k;
  return m;
}

Mat mat(int rows, int cols, std::initializer_list<double> xs) {
  Mat m(rows, cols);
  long k = 0;
  for (double x : xs) m(k / cols, k % cols) = x, ++k;
  return m;
}

TrackingParams default_policy(double d1, double eps0) {
  TrackingParams tp;
  tp.kappa_exp = 0.2;
  tp.m_exp = 18.0;  // exponential primitives have all moments
  tp.d1 = d1;
  tp.rho = 4.0;
  tp.rule.T = 4.0;
  tp.rule.p0 = 4;
  tp.rule.j0 = 2;
  tp.rule.eta = 0.25;
  tp.rule.M = 1.0;
  tp.rule.eps0 = eps0;
  tp.rule.kind = RuleKind::Zero;
  return tp;
}

CostParams default_cost(int I, int N) {
  CostParams cp;
  cp.gamma = 1.0;
  cp.h = Vec::Ones(I);
  cp.p = Vec::Zero(N);
  return cp;
}

SpecFileData make_single() {
  SpecFileData d;
  NetworkSpec& s = d.spec;
  s.I = s.J = s.K = 1;
  s.C = imat(1, 1, {1});
  s.A = imat(1, 1, {1});
  s.routing = mat(1, 2, {1, 0});
  s.arrival_family = {PrimitiveFamily::Exponential};
  s.service_family = {PrimitiveFamily::Exponential};
  ScalingScheme& sc = d.scaling;
  sc.alpha = vec({1});
  sc.sigma_u = vec({1});
  sc.theta1 = vec({-1});
  sc.beta = vec({1});
  sc.sigma_v = vec({1});
  sc.theta2 = vec({0});
  sc.q = vec({1});
  sc.r_list = {5, 10, 20, 40};
  d.policy = default_policy(2.05, 0.05);
  d.cost = default_cost(1, 1);
  return d;
}

SpecFileData make_tandem() {
  SpecFileData d;
  NetworkSpec& s = d.spec;
  s.I = s.J = s.K = 2;
  s.C = imat(2, 2, {1, 0, 0, 1});
  s.A = imat(2, 2, {1, 0, 0, 1});
  s.routing = mat(2, 3, {0, 0, 1,    // station 1 feeds station 2
                         1, 0, 0});  // station 2 exits
  s.arrival_family = {PrimitiveFamily::Exponential, PrimitiveFamily::None};
  s.service_family = {PrimitiveFamily::Exponential, PrimitiveFamily::Exponential};
  ScalingScheme& sc = d.scaling;
  sc.alpha = vec({1, 0});
  sc.sigma_u = vec({1, 0});
  sc.theta1 = vec({-0.5, 0});
  sc.beta = vec({1, 1});
  sc.sigma_v = vec({1, 1});
  sc.theta2 = vec({0, 0});
  sc.q = vec({1, 1});
  sc.r_list = {5, 10, 20, 40};
  d.policy = default_policy(2.05, 0.1);
  d.cost = default_cost(2, 2);
  return d;
}

SpecFileData make_n_network() {
  SpecFileData d;
  NetworkSpec& s = d.spec;
  s.I = 2;
  s.J = 3;
  s.K = 2;
  // Server 1 drains class 1 only; server 2 splits between both classes.
  s.C = imat(2, 3, {1, 1, 0, 0, 0, 1});
  s.A = imat(2, 3, {1, 0, 0, 0, 1, 1});
  s.routing = mat(3, 3, {1, 0, 0, 1, 0, 0, 1, 0, 0});
  s.arrival_family = {PrimitiveFamily::Exponential, PrimitiveFamily::Exponential};
  s.service_family = {PrimitiveFamily::Exponential, PrimitiveFamily::Exponential,
                      PrimitiveFamily::Exponential};
  ScalingScheme& sc = d.scaling;
  sc.alpha = vec({1.5, 0.5});
  sc.sigma_u = vec({2.0 / 3.0, 2});
  sc.theta1 = vec({-0.75, -0.25});
  sc.beta = vec({1, 1, 1});
  sc.sigma_v = vec({1, 1, 1});
  sc.theta2 = vec({0, 0, 0});
  sc.q = vec({1, 1});
  sc.r_list = {5, 10, 20, 40};
  d.workload = WorkloadInput{mat(1, 2, {1, 1}), mat(1, 2, {1, 1})};
  d.policy = default_policy(2.05, 0.1);
  d.cost = default_cost(2, 2);
  return d;
}

// Three servers work four buffers through six activities; buffers 3 and 4 are
// each drained from two servers, with identical routing inside each pair.
// Exogenous work enters classes 1 and 2, feeds 3 then 4, and partially
// recycles into 1 and 2. All rates are dyadic so the planning identities hold
// without roundoff; the allocation LP solves at x* = (.75 .625 .375 .5 .5 .25)
// with every server saturated.
SpecFileData make_jobshop() {
  SpecFileData d;
  NetworkSpec& s = d.spec;
  s.I = 4;
  s.J = 6;
  s.K = 3;
  s.C = imat(4, 6,
             {1, 0, 0, 0, 0, 0,
              0, 1, 0, 0, 0, 0,
              0, 0, 1, 1, 0, 0,
              0, 0, 0, 0, 1, 1});
  s.A = imat(3, 6,
             {1, 0, 0, 0, 0, 1,
              0, 1, 1, 0, 0, 0,
              0, 0, 0, 1, 1, 0});
  s.routing = mat(6, 5,
                  {0,   0,    0,    1, 0,
                   0,   0,    0,    0, 1,
                   0.5, 0,    0,    0, 0.5,
                   0.5, 0,    0,    0, 0.5,
                   0.5, 0.25, 0.25, 0, 0,
                   0.5, 0.25, 0.25, 0, 0});
  s.arrival_family = {PrimitiveFamily::Exponential, PrimitiveFamily::Exponential,
                      PrimitiveFamily::None, PrimitiveFamily::None};
  s.service_family.assign(6, PrimitiveFamily::Exponential);
  ScalingScheme& sc = d.scaling;
  sc.alpha = vec({1, 0.75, 0, 0});
  sc.sigma_u = vec({1, 4.0 / 3.0, 0, 0});
  sc.theta1 = vec({-0.5, -0.375, 0, 0});
  sc.beta = vec({2, 2, 2, 1.5, 3, 2});
  sc.sigma_v = vec({0.5, 0.5, 0.5, 2.0 / 3.0, 1.0 / 3.0, 0.5});
  sc.theta2 = Vec::Zero(6);
  sc.q = vec({0.5, 0.5, 0.5, 0.5});
  sc.r_list = {5, 10, 20, 40};
  // One workload direction: all six activities are basic, L = I + K - B = 1.
  d.workload = WorkloadInput{mat(1, 4, {24, 28, 19, 18}), mat(1, 3, {10, 20, 15})};
  d.policy = default_policy(4.05, 0.1);
  d.cost = default_cost(4, 3);
  return d;
}

}  // namespace

std::vector<std::string> example_names() {
  return {"single", "tandem", "n_network", "jobshop_fig3"};
}

SpecFileData load_example(const std::string& name) {
  if (name == "single") return make_single();
  if (name == "tandem") return make_tandem();
  if (name == "n_network") return make_n_network();
  if (name == "jobshop_fig3") return make_jobshop();
  throw UnknownExampleError("unknown example: " + name +
                            " (known: single, tandem, n_network, jobshop_fig3)");
}

}  // namespace spnet
