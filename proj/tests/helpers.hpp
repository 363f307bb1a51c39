#pragma once
#include <initializer_list>
#include <vector>

#include "spnet/examples.hpp"
#include "spnet/network.hpp"
#include "spnet/plan.hpp"

namespace spnet::testing {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<long>(v.size()));
  long k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

inline IVec ivec(std::initializer_list<int> v) {
  IVec out(static_cast<long>(v.size()));
  long k = 0;
  for (int x : v) out(k++) = x;
  return out;
}

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  long nr = static_cast<long>(rows.size());
  long nc = static_cast<long>(rows.begin()->size());
  Mat out(nr, nc);
  long r = 0;
  for (const auto& row : rows) {
    long c = 0;
    for (double x : row) out(r, c++) = x;
    ++r;
  }
  return out;
}

inline IMat imat(std::initializer_list<std::initializer_list<int>> rows) {
  long nr = static_cast<long>(rows.size());
  long nc = static_cast<long>(rows.begin()->size());
  IMat out(nr, nc);
  long r = 0;
  for (const auto& row : rows) {
    long c = 0;
    for (int x : row) out(r, c++) = x;
    ++r;
  }
  return out;
}

// Single buffer, single server, exit-only routing.
inline NetworkSpec single_spec() {
  NetworkSpec s;
  s.I = s.J = s.K = 1;
  s.C = imat({{1}});
  s.A = imat({{1}});
  s.routing = mat({{1, 0}});
  s.arrival_family = {PrimitiveFamily::Exponential};
  s.service_family = {PrimitiveFamily::Exponential};
  return s;
}

inline ScalingScheme single_scaling() {
  ScalingScheme sc;
  sc.alpha = vec({1});
  sc.sigma_u = vec({1});
  sc.theta1 = vec({-1});
  sc.beta = vec({1});
  sc.sigma_v = vec({1});
  sc.theta2 = vec({0});
  sc.q = vec({1});
  return sc;
}

// Two buffers in series on dedicated servers; activity 1 feeds buffer 2.
inline NetworkSpec tandem_spec() {
  NetworkSpec s;
  s.I = s.J = s.K = 2;
  s.C = imat({{1, 0}, {0, 1}});
  s.A = imat({{1, 0}, {0, 1}});
  s.routing = mat({{0, 0, 1}, {1, 0, 0}});
  s.arrival_family = {PrimitiveFamily::Exponential, PrimitiveFamily::None};
  s.service_family = {PrimitiveFamily::Exponential, PrimitiveFamily::Exponential};
  return s;
}

inline ScalingScheme tandem_scaling() {
  ScalingScheme sc;
  sc.alpha = vec({1, 0});
  sc.sigma_u = vec({1, 0});
  sc.theta1 = vec({-0.5, 0});
  sc.beta = vec({1, 1});
  sc.sigma_v = vec({1, 1});
  sc.theta2 = vec({0, 0});
  sc.q = vec({1, 1});
  return sc;
}

inline StaticPlan example_plan(const char* name) {
  SpecFileData d = load_example(name);
  return build_plan(d.spec, d.scaling, d.workload);
}

}  // namespace spnet::testing
