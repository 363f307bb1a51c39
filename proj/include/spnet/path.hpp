#pragma once
#include <cassert>
#include <vector>

#include "spnet/linalg.hpp"

namespace spnet {

enum class Interp { PiecewiseConstant, PiecewiseLinear };

// Vector-valued path sampled on an increasing time grid. Row k of `values`
// is the path value at `t[k]` (cadlag convention for PiecewiseConstant:
// the stored value holds on [t[k], t[k+1])).
struct PiecewisePath {
  std::vector<double> t;
  Mat values;  // size() x dim()
  Interp interp = Interp::PiecewiseConstant;

  int size() const { return static_cast<int>(t.size()); }
  int dim() const { return static_cast<int>(values.cols()); }

  Vec at(int k) const { return values.row(k).transpose(); }

  // Evaluates by the interpolation tag; t clamped to the grid range.
  Vec eval(double time) const;

  // Grid must be strictly increasing and match the value rows.
  bool grid_ok() const;

  static PiecewisePath uniform(double t0, double dt, int n_points, int dim,
                               Interp interp = Interp::PiecewiseConstant);
};

inline bool PiecewisePath::grid_ok() const {
  if (static_cast<int>(t.size()) != values.rows()) return false;
  for (size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1])) return false;
  }
  return true;
}

inline PiecewisePath PiecewisePath::uniform(double t0, double dt, int n_points,
                                            int dim, Interp interp) {
  PiecewisePath p;
  p.t.resize(n_points);
  for (int k = 0; k < n_points; ++k) p.t[k] = t0 + k * dt;
  p.values = Mat::Zero(n_points, dim);
  p.interp = interp;
  return p;
}

inline Vec PiecewisePath::eval(double time) const {
  assert(!t.empty());
  if (time <= t.front()) return at(0);
  if (time >= t.back()) return at(size() - 1);
  // last k with t[k] <= time
  auto it = std::upper_bound(t.begin(), t.end(), time);
  int k = static_cast<int>(it - t.begin()) - 1;
  if (interp == Interp::PiecewiseConstant) return at(k);
  double w = (time - t[k]) / (t[k + 1] - t[k]);
  return (1.0 - w) * at(k) + w * at(k + 1);
}

}  // namespace spnet
