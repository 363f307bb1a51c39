#include "spnet/network.hpp"

#include <cmath>
#include <sstream>

namespace spnet {

std::string family_name(PrimitiveFamily f) {
  switch (f) {
    case PrimitiveFamily::None: return "none";
    case PrimitiveFamily::Deterministic: return "deterministic";
    case PrimitiveFamily::Exponential: return "exponential";
    case PrimitiveFamily::Gamma: return "gamma";
    case PrimitiveFamily::Lognormal: return "lognormal";
  }
  return "?";
}

PrimitiveFamily family_from_name(const std::string& s) {
  if (s == "none") return PrimitiveFamily::None;
  if (s == "deterministic") return PrimitiveFamily::Deterministic;
  if (s == "exponential") return PrimitiveFamily::Exponential;
  if (s == "gamma") return PrimitiveFamily::Gamma;
  if (s == "lognormal") return PrimitiveFamily::Lognormal;
  throw ParseError("unknown primitive family: " + s);
}

int NetworkSpec::buffer_of(int j) const {
  for (int i = 0; i < I; ++i) {
    if (C(i, j) != 0) return i;
  }
  return -1;
}

int NetworkSpec::server_of(int j) const {
  for (int k = 0; k < K; ++k) {
    if (A(k, j) != 0) return k;
  }
  return -1;
}

std::vector<int> NetworkSpec::server_activities(int k) const {
  std::vector<int> out;
  for (int j = 0; j < J; ++j) {
    if (A(k, j) != 0) out.push_back(j);
  }
  return out;
}

std::vector<int> NetworkSpec::buffer_activities(int i) const {
  std::vector<int> out;
  for (int j = 0; j < J; ++j) {
    if (C(i, j) != 0) out.push_back(j);
  }
  return out;
}

Mat NetworkSpec::p_prime() const {
  Mat pp = Mat::Zero(I, J);
  for (int j = 0; j < J; ++j) {
    for (int i = 0; i < I; ++i) pp(i, j) = routing(j, i + 1);
  }
  return pp;
}

std::string ValidationReport::joined() const {
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

namespace {

void check_incidence(const IMat& m, int cols_expected, const std::string& name,
                     std::vector<std::string>* out) {
  if (m.cols() != cols_expected) {
    out->push_back(name + " must have one column per activity");
    return;
  }
  for (int j = 0; j < m.cols(); ++j) {
    int ones = 0;
    for (int r = 0; r < m.rows(); ++r) {
      if (m(r, j) != 0 && m(r, j) != 1) {
        out->push_back(name + " entries must be 0/1");
        return;
      }
      ones += m(r, j);
    }
    if (ones != 1) {
      out->push_back(name + " column " + std::to_string(j + 1) +
                     " must contain exactly one 1");
    }
  }
  for (int r = 0; r < m.rows(); ++r) {
    if (m.row(r).sum() < 1) {
      out->push_back(name + " row " + std::to_string(r + 1) +
                     " has no activity");
    }
  }
}

}  // namespace

ValidationReport validate_spec(const NetworkSpec& spec) {
  ValidationReport rep;
  auto* v = &rep.violations;
  if (spec.I <= 0 || spec.J <= 0 || spec.K <= 0) {
    v->push_back("I, J, K must be positive");
    return rep;
  }
  if (spec.C.rows() != spec.I || spec.A.rows() != spec.K) {
    v->push_back("C/A row counts must match buffer/server counts");
    return rep;
  }
  check_incidence(spec.C, spec.J, "C", v);
  check_incidence(spec.A, spec.J, "A", v);
  if (spec.routing.rows() != spec.J || spec.routing.cols() != spec.I + 1) {
    v->push_back("routing must be J rows of length I+1 (leave column first)");
  } else {
    for (int j = 0; j < spec.J; ++j) {
      double s = 0.0;
      bool neg = false;
      for (int c = 0; c <= spec.I; ++c) {
        if (spec.routing(j, c) < 0.0) neg = true;
        s += spec.routing(j, c);
      }
      if (neg) {
        v->push_back("routing row " + std::to_string(j + 1) + " has a negative entry");
      }
      if (std::abs(s - 1.0) > 1e-12) {
        v->push_back("routing row " + std::to_string(j + 1) + " does not sum to 1");
      }
    }
  }
  if (static_cast<int>(spec.arrival_family.size()) != spec.I) {
    v->push_back("arrival_family must have one entry per buffer");
  }
  if (static_cast<int>(spec.service_family.size()) != spec.J) {
    v->push_back("service_family must have one entry per activity");
  } else {
    for (int j = 0; j < spec.J; ++j) {
      if (spec.service_family[j] == PrimitiveFamily::None) {
        v->push_back("activity " + std::to_string(j + 1) + " needs a service family");
      }
    }
  }
  return rep;
}

ValidationReport validate_bundle(const NetworkSpec& spec, const ScalingScheme& sc) {
  ValidationReport rep = validate_spec(spec);
  auto* v = &rep.violations;
  auto want = [&](const Vec& x, int n, const char* name) {
    if (x.size() != n) v->push_back(std::string(name) + " has wrong length");
  };
  want(sc.alpha, spec.I, "alpha");
  want(sc.sigma_u, spec.I, "sigma_u");
  want(sc.theta1, spec.I, "theta1");
  want(sc.q, spec.I, "q");
  want(sc.beta, spec.J, "beta");
  want(sc.sigma_v, spec.J, "sigma_v");
  want(sc.theta2, spec.J, "theta2");
  if (!rep.ok()) return rep;

  for (int i = 0; i < spec.I; ++i) {
    if (sc.alpha(i) < 0.0) v->push_back("alpha must be nonnegative");
    if (sc.sigma_u(i) < 0.0) v->push_back("sigma_u must be nonnegative");
    if (sc.q(i) < 0.0) v->push_back("q must be nonnegative");
    bool has_arrivals = sc.alpha(i) > 0.0;
    bool has_family = spec.arrival_family[i] != PrimitiveFamily::None;
    if (has_arrivals && !has_family) {
      v->push_back("class " + std::to_string(i + 1) +
                   " has positive arrival rate but no arrival family");
    }
    if (!has_arrivals && has_family) {
      v->push_back("class " + std::to_string(i + 1) +
                   " has an arrival family but zero arrival rate");
    }
  }
  for (int j = 0; j < spec.J; ++j) {
    if (sc.beta(j) <= 0.0) v->push_back("beta must be positive");
    if (sc.sigma_v(j) < 0.0) v->push_back("sigma_v must be nonnegative");
  }
  for (double r : sc.r_list) {
    if (r <= 0.0) v->push_back("r_list entries must be positive");
  }
  return rep;
}

double PrimitiveSampler::sample(RngStream& rng) const {
  switch (family) {
    case PrimitiveFamily::Deterministic: return a;
    case PrimitiveFamily::Exponential: return rng.exponential(a);
    case PrimitiveFamily::Gamma: return rng.gamma(a, b);
    case PrimitiveFamily::Lognormal: return rng.lognormal(a, b);
    case PrimitiveFamily::None: break;
  }
  throw SpnetError("sampling from a class with no primitive");
}

PrimitiveSampler fit_primitive(PrimitiveFamily family, double mean, double sd,
                               std::vector<std::string>* notes,
                               const std::string& label) {
  PrimitiveSampler s;
  s.family = family;
  s.mean = mean;
  switch (family) {
    case PrimitiveFamily::None:
      break;
    case PrimitiveFamily::Deterministic:
      s.a = mean;
      if (notes && sd != 0.0) {
        notes->push_back(label + ": deterministic family forces sd 0 (requested " +
                         std::to_string(sd) + ")");
      }
      break;
    case PrimitiveFamily::Exponential:
      s.a = mean;
      if (notes && std::abs(sd - mean) > 1e-9 * std::max(1.0, mean)) {
        notes->push_back(label + ": exponential family forces sd = mean (requested sd " +
                         std::to_string(sd) + ", mean " + std::to_string(mean) + ")");
      }
      break;
    case PrimitiveFamily::Gamma: {
      if (sd <= 0.0) throw SpnetError(label + ": gamma family needs sd > 0");
      double shape = (mean / sd) * (mean / sd);
      double scale = sd * sd / mean;
      s.a = shape;
      s.b = scale;
      break;
    }
    case PrimitiveFamily::Lognormal: {
      if (sd <= 0.0) throw SpnetError(label + ": lognormal family needs sd > 0");
      double s2 = std::log(1.0 + (sd / mean) * (sd / mean));
      s.a = std::log(mean) - 0.5 * s2;  // mu
      s.b = std::sqrt(s2);              // sigma
      break;
    }
  }
  return s;
}

MaterializedNetwork materialize(const NetworkSpec& spec, const ScalingScheme& sc,
                                double r) {
  if (r <= 0.0) throw SpnetError("materialize needs r > 0");
  MaterializedNetwork m;
  m.r = r;
  m.alpha_r = sc.alpha + sc.theta1 / r;
  m.beta_r = sc.beta + sc.theta2 / r;
  for (int i = 0; i < spec.I; ++i) {
    if (m.alpha_r(i) < 0.0) {
      throw NegativeRateError("arrival rate of class " + std::to_string(i + 1) +
                              " is negative at r = " + std::to_string(r));
    }
  }
  for (int j = 0; j < spec.J; ++j) {
    if (m.beta_r(j) <= 0.0) {
      throw NegativeRateError("service rate of activity " + std::to_string(j + 1) +
                              " is nonpositive at r = " + std::to_string(r));
    }
  }
  m.q_r = IVec(spec.I);
  for (int i = 0; i < spec.I; ++i) {
    m.q_r(i) = static_cast<int>(std::floor(r * sc.q(i) + 0.5));
  }
  m.arrival.resize(spec.I);
  for (int i = 0; i < spec.I; ++i) {
    if (m.alpha_r(i) > 0.0 && spec.arrival_family[i] != PrimitiveFamily::None) {
      m.arrival[i] = fit_primitive(spec.arrival_family[i], 1.0 / m.alpha_r(i),
                                   sc.sigma_u(i), &m.notes,
                                   "arrival " + std::to_string(i + 1));
    }
  }
  m.service.resize(spec.J);
  for (int j = 0; j < spec.J; ++j) {
    m.service[j] = fit_primitive(spec.service_family[j], 1.0 / m.beta_r(j),
                                 sc.sigma_v(j), &m.notes,
                                 "service " + std::to_string(j + 1));
  }
  return m;
}

Mat routing_covariance(const NetworkSpec& spec, int j) {
  Mat cov = Mat::Zero(spec.I, spec.I);
  for (int i1 = 0; i1 < spec.I; ++i1) {
    double p1 = spec.routing(j, i1 + 1);
    for (int i2 = 0; i2 < spec.I; ++i2) {
      double p2 = spec.routing(j, i2 + 1);
      cov(i1, i2) = (i1 == i2 ? p1 : 0.0) - p1 * p2;
    }
  }
  return cov;
}

Relabeling reorder_basic_first(const NetworkSpec& spec, const ScalingScheme& sc,
                               const Vec& xstar, double tol) {
  Relabeling out;
  out.perm.reserve(spec.J);
  for (int j = 0; j < spec.J; ++j) {
    if (xstar(j) > tol) out.perm.push_back(j);
  }
  out.n_basic = static_cast<int>(out.perm.size());
  for (int j = 0; j < spec.J; ++j) {
    if (!(xstar(j) > tol)) out.perm.push_back(j);
  }
  out.spec = spec;
  out.scaling = sc;
  out.xstar = Vec(spec.J);
  for (int jn = 0; jn < spec.J; ++jn) {
    int jo = out.perm[jn];
    out.spec.C.col(jn) = spec.C.col(jo);
    out.spec.A.col(jn) = spec.A.col(jo);
    out.spec.routing.row(jn) = spec.routing.row(jo);
    out.spec.service_family[jn] = spec.service_family[jo];
    out.scaling.beta(jn) = sc.beta(jo);
    out.scaling.sigma_v(jn) = sc.sigma_v(jo);
    out.scaling.theta2(jn) = sc.theta2(jo);
    out.xstar(jn) = xstar(jo);
  }
  return out;
}

}  // namespace spnet
