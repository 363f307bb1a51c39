#pragma once
#include <cstdint>
#include <vector>

#include "spnet/linalg.hpp"
#include "spnet/path.hpp"

namespace spnet {

// Driving-noise paths zeta(t) = q + theta t + Sigma^(1/2) B(t) on a uniform
// grid. In one dimension the generator can also emit each step's exact
// within-step infimum (sampled from the Brownian bridge law) as an extra grid
// point at the step midpoint; downstream reflection then carries no
// grid-coarseness bias at the real nodes. real_nodes indexes the non-synthetic
// points; quadrature should use those.
class ZetaGenerator {
 public:
  ZetaGenerator(Vec q, Vec theta, const Mat& sigma, double dt, double horizon,
                bool bridge_minima, std::uint64_t seed);

  PiecewisePath generate(int rep) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<int>& real_nodes() const { return real_nodes_; }
  bool bridge_active() const { return bridge_; }
  int dim() const { return static_cast<int>(q_.size()); }
  double dt() const { return dt_; }

 private:
  Vec q_, theta_;
  Mat factor_;
  double dt_, horizon_;
  bool bridge_;
  std::uint64_t seed_;
  int n_steps_;
  double sigma1d_;  // sqrt of the 1-d variance rate, bridge mode only
  std::vector<double> times_;
  std::vector<int> real_nodes_;
};

struct BrownianBatch {
  std::vector<double> times;
  std::vector<int> real_nodes;
  std::vector<Mat> paths;  // one (times x dim) block per replication
  Vec q, theta;
  double dt = 0.0;
  bool bridge = false;
};

// Materializes `reps` paths. Throws NotPsdError when Sigma has an eigenvalue
// below -1e-10 (scaled); rank-deficient PSD inputs are fine.
BrownianBatch simulate_zeta(const Vec& q, const Vec& theta, const Mat& sigma,
                            double dt, double horizon, int reps,
                            std::uint64_t seed, bool bridge_minima = false);

}  // namespace spnet
