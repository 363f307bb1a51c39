#include "spnet/brownian.hpp"

#include <cmath>

#include "spnet/errors.hpp"
#include "spnet/rng.hpp"

namespace spnet {

ZetaGenerator::ZetaGenerator(Vec q, Vec theta, const Mat& sigma, double dt,
                             double horizon, bool bridge_minima,
                             std::uint64_t seed)
    : q_(std::move(q)),
      theta_(std::move(theta)),
      dt_(dt),
      horizon_(horizon),
      seed_(seed) {
  if (dt <= 0.0 || horizon <= 0.0) {
    throw SpnetError("noise grid needs dt > 0 and horizon > 0");
  }
  factor_ = psd_factor(sigma);
  n_steps_ = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  bridge_ = bridge_minima && dim() == 1;
  sigma1d_ = dim() == 1 ? std::sqrt(std::max(0.0, sigma(0, 0))) : 0.0;

  times_.clear();
  real_nodes_.clear();
  times_.push_back(0.0);
  real_nodes_.push_back(0);
  for (int k = 1; k <= n_steps_; ++k) {
    if (bridge_) {
      times_.push_back((k - 0.5) * dt_);
    }
    times_.push_back(k * dt_);
    real_nodes_.push_back(static_cast<int>(times_.size()) - 1);
  }
}

PiecewisePath ZetaGenerator::generate(int rep) const {
  RngStream rng(seed_, 0xB10C, static_cast<std::uint64_t>(rep));
  const int d = dim();
  PiecewisePath p;
  p.t = times_;
  p.interp = Interp::PiecewiseConstant;
  p.values = Mat::Zero(static_cast<int>(times_.size()), d);
  p.values.row(0) = q_.transpose();

  Vec g(d);
  const double sdt = std::sqrt(dt_);
  Vec cur = q_;
  int row = 1;
  for (int k = 1; k <= n_steps_; ++k) {
    for (int i = 0; i < d; ++i) g(i) = rng.normal();
    Vec inc = theta_ * dt_ + sdt * (factor_ * g);
    if (bridge_) {
      // exact law of the within-step minimum given the endpoints
      double w = inc(0);
      double u = rng.uniform01_open_low();
      double v2 = sigma1d_ * sigma1d_ * dt_;
      double minv = cur(0);
      if (v2 > 0.0) {
        minv = cur(0) + 0.5 * (w - std::sqrt(w * w - 2.0 * v2 * std::log(u)));
      } else if (w < 0.0) {
        minv = cur(0) + w;
      }
      p.values(row, 0) = minv;
      ++row;
    }
    cur += inc;
    p.values.row(row) = cur.transpose();
    ++row;
  }
  return p;
}

BrownianBatch simulate_zeta(const Vec& q, const Vec& theta, const Mat& sigma,
                            double dt, double horizon, int reps,
                            std::uint64_t seed, bool bridge_minima) {
  ZetaGenerator gen(q, theta, sigma, dt, horizon, bridge_minima, seed);
  BrownianBatch batch;
  batch.times = gen.times();
  batch.real_nodes = gen.real_nodes();
  batch.q = q;
  batch.theta = theta;
  batch.dt = dt;
  batch.bridge = gen.bridge_active();
  batch.paths.reserve(reps);
  for (int rep = 0; rep < reps; ++rep) {
    batch.paths.push_back(gen.generate(rep).values);
  }
  return batch;
}

}  // namespace spnet
