// Generates the committed oracle for the one-dimensional reflected Brownian
// motion holding cost E int_0^H e^{-gamma t} Q(t) dt, Q = RBM(theta, sigma2)
// from q, two ways:
//   - closed form from the resolvent ODE (sigma2/2) u'' + theta u' - gamma u
//     = -q with u'(0) = 0, infinite horizon;
//   - a fine-grid Monte Carlo run with exact within-step minima (Brownian
//     bridge), trapezoid quadrature on the grid, finite horizon H.
// The Monte Carlo block is what the evaluator acceptance check compares
// against; the closed form pins the MC run itself.
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spnet/rng.hpp"

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double resolvent_value(double theta, double sigma2, double gamma, double q) {
  // u(x) = x/gamma + theta/gamma^2 + B e^(lam x), lam the negative root of
  // (sigma2/2) lam^2 + theta lam - gamma = 0, B fixed by u'(0) = 0.
  double lam = (-theta - std::sqrt(theta * theta + 2.0 * sigma2 * gamma)) / sigma2;
  double B = -1.0 / (gamma * lam);
  return q / gamma + theta / (gamma * gamma) + B * std::exp(lam * q);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-dimensional RBM holding-cost oracle"};
  double theta = -1.0, sigma2 = 2.0, gamma = 1.0, q = 0.0;
  double dt = 1e-4, horizon = 10.0;
  long reps = 150000;
  std::uint64_t seed = 7;
  std::string out;
  app.add_option("--theta", theta, "drift");
  app.add_option("--sigma2", sigma2, "variance rate")->check(CLI::PositiveNumber);
  app.add_option("--gamma", gamma, "discount")->check(CLI::PositiveNumber);
  app.add_option("--q", q, "initial state")->check(CLI::NonNegativeNumber);
  app.add_option("--dt", dt, "grid step")->check(CLI::PositiveNumber);
  app.add_option("--horizon", horizon, "quadrature horizon")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "replications")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--out", out, "fixture path (default stdout)");
  CLI11_PARSE(app, argc, argv);

  const long n = std::lround(horizon / dt);
  const double sig = std::sqrt(sigma2);
  const double sqdt = std::sqrt(dt);
  std::vector<double> disc(static_cast<size_t>(n) + 1);
  for (long k = 0; k <= n; ++k) disc[static_cast<size_t>(k)] = std::exp(-gamma * dt * k);

  double mean = 0.0, m2 = 0.0;
  for (long rep = 0; rep < reps; ++rep) {
    spnet::RngStream rng(seed, 0xB10C, static_cast<std::uint64_t>(rep));
    double z = q;        // free path
    double runmax = 0.0; // sup_s (q - z(s))^+ so far
    double acc = 0.5 * disc[0] * q;
    for (long k = 1; k <= n; ++k) {
      double w = theta * dt + sig * sqdt * rng.normal();
      double u = rng.uniform01_open_low();
      // exact minimum of the bridge between z and z + w
      double m = z + 0.5 * (w - std::sqrt(w * w - 2.0 * sigma2 * dt * std::log(u)));
      if (q - m > runmax) runmax = q - m;
      z += w;
      if (q - z > runmax) runmax = q - z;
      double val = z - q + (q > runmax ? q : runmax);
      acc += (k == n ? 0.5 : 1.0) * disc[static_cast<size_t>(k)] * val;
    }
    double x = acc * dt;
    double d = x - mean;
    mean += d / (rep + 1);
    m2 += d * (x - mean);
  }
  double se = reps > 1 ? std::sqrt(m2 / (reps - 1) / static_cast<double>(reps)) : 0.0;

  std::string text;
  text += "# one-dimensional RBM discounted holding-cost oracle\n";
  text += "theta = " + num(theta) + "\n";
  text += "sigma2 = " + num(sigma2) + "\n";
  text += "gamma = " + num(gamma) + "\n";
  text += "q = " + num(q) + "\n";
  text += "closed_form = " + num(resolvent_value(theta, sigma2, gamma, q)) + "\n";
  text += "mc_mean = " + num(mean) + "\n";
  text += "mc_se = " + num(se) + "\n";
  text += "mc_dt = " + num(dt) + "\n";
  text += "mc_horizon = " + num(horizon) + "\n";
  text += "mc_reps = " + std::to_string(reps) + "\n";
  text += "seed = " + std::to_string(seed) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "cannot open " << out << '\n';
      return 1;
    }
    f << text;
  }
  return 0;
}
