#pragma once
#include <string>
#include <vector>

#include "spnet/errors.hpp"
#include "spnet/linalg.hpp"
#include "spnet/rng.hpp"

namespace spnet {

enum class PrimitiveFamily { None, Deterministic, Exponential, Gamma, Lognormal };

std::string family_name(PrimitiveFamily f);
PrimitiveFamily family_from_name(const std::string& s);

// Unitary processing network: I buffers, J activities, K servers. Each
// activity works on exactly one buffer (column of C) at exactly one server
// (column of A). routing row j = (p0, p1, ..., pI) with index 0 = leave.
struct NetworkSpec {
  int I = 0, J = 0, K = 0;
  IMat C;       // I x J, 0/1
  IMat A;       // K x J, 0/1
  Mat routing;  // J x (I+1)
  std::vector<PrimitiveFamily> arrival_family;  // size I, None = no arrivals
  std::vector<PrimitiveFamily> service_family;  // size J

  int buffer_of(int j) const;  // sigma_1
  int server_of(int j) const;  // sigma_2
  std::vector<int> server_activities(int k) const;
  std::vector<int> buffer_activities(int i) const;
  Mat p_prime() const;  // I x J, column j = routing of j into buffers
};

// First-order data and heavy-traffic perturbations. alpha/beta are the limit
// rates; at scale r the rates are alpha + theta1/r and beta + theta2/r.
struct ScalingScheme {
  Vec alpha, sigma_u, theta1;  // size I
  Vec beta, sigma_v, theta2;   // size J
  Vec q;                       // size I, limit initial condition
  std::vector<double> r_list;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string joined() const;
};

ValidationReport validate_spec(const NetworkSpec& spec);
ValidationReport validate_bundle(const NetworkSpec& spec, const ScalingScheme& sc);

// Two-parameter sampler for one primitive sequence.
struct PrimitiveSampler {
  PrimitiveFamily family = PrimitiveFamily::None;
  double a = 0.0, b = 0.0;  // family-specific
  double mean = 0.0;

  double sample(RngStream& rng) const;
};

// Matches mean exactly; sd exactly for two-parameter families. Families with
// implied sd (exponential: sd = mean, deterministic: sd = 0) get a note when
// the requested sd disagrees.
PrimitiveSampler fit_primitive(PrimitiveFamily family, double mean, double sd,
                               std::vector<std::string>* notes, const std::string& label);

struct MaterializedNetwork {
  double r = 0.0;
  Vec alpha_r;  // size I
  Vec beta_r;   // size J
  IVec q_r;     // size I, round-half-up of r * q
  std::vector<PrimitiveSampler> arrival;  // size I (family None for silent classes)
  std::vector<PrimitiveSampler> service;  // size J
  std::vector<std::string> notes;
};

// Throws NegativeRateError when a perturbed rate goes negative (or a service
// rate hits zero).
MaterializedNetwork materialize(const NetworkSpec& spec, const ScalingScheme& sc,
                                double r);

// Covariance of one routing step of activity j over buffer coordinates:
// cov_{i1,i2} = p_{i1} delta_{i1,i2} - p_{i1} p_{i2}.
Mat routing_covariance(const NetworkSpec& spec, int j);

// Stable relabeling that lists activities with xstar_j > tol first. The
// permutation maps new index -> old index; scaling data moves along.
struct Relabeling {
  NetworkSpec spec;
  ScalingScheme scaling;
  Vec xstar;
  std::vector<int> perm;
  int n_basic = 0;
};
Relabeling reorder_basic_first(const NetworkSpec& spec, const ScalingScheme& sc,
                               const Vec& xstar, double tol = 1e-9);

}  // namespace spnet
