#include "spnet/skorohod.hpp"

#include <cmath>

#include "spnet/errors.hpp"

namespace spnet {

namespace {

void check_inputs(const PiecewisePath& x, const Mat& D) {
  if (!x.grid_ok()) throw SpnetError("reflection input path has a bad grid");
  if (D.rows() != x.dim() || D.cols() != x.dim()) {
    throw SpnetError("reflection matrix does not match the path dimension");
  }
  for (int i = 0; i < x.dim(); ++i) {
    if (x.values(0, i) < 0.0) {
      throw SpnetError("reflection input must start in the nonnegative orthant");
    }
    if (D(i, i) <= 0.0) {
      throw NotContractiveError("reflection matrix needs a positive diagonal");
    }
  }
}

SPSolution finish(const PiecewisePath& x, const Mat& D, Mat y_vals, int sweeps) {
  SPSolution sol;
  sol.y.t = x.t;
  sol.y.interp = x.interp;
  sol.y.values = std::move(y_vals);
  sol.z.t = x.t;
  sol.z.interp = x.interp;
  sol.z.values = x.values + sol.y.values * D.transpose();
  sol.sweeps = sweeps;
  return sol;
}

SPSolution solve_1d(const PiecewisePath& x, const Mat& D) {
  const int n = x.size();
  const double d = D(0, 0);
  Mat y(n, 1);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double cand = 0.0 - x.values(k, 0) / d;
    if (cand > acc) acc = cand;
    y(k, 0) = acc;
  }
  return finish(x, D, std::move(y), 1);
}

}  // namespace

SPSolution solve_sp_general(const PiecewisePath& x, const Mat& D, double tol,
                            int max_sweeps) {
  check_inputs(x, D);
  const int n = x.size();
  const int d = x.dim();

  // coupling W = I - diag(D)^-1 D (zero diagonal); each sweep applies the
  // running-max operator of the one-dimensional problems fed by W y
  Mat w(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      w(i, j) = (i == j) ? 0.0 : -D(i, j) / D(i, i);
    }
  }
  if (d > 1) {
    double rad = spectral_radius(w.cwiseAbs());
    if (rad >= 1.0 - 1e-9) {
      throw NotContractiveError(
          "reflection coupling has spectral radius " + std::to_string(rad) +
          "; the fixed point need not converge");
    }
  }

  Mat xd = x.values;  // x_i(t) / D_ii
  for (int i = 0; i < d; ++i) xd.col(i) /= D(i, i);

  Mat y = Mat::Zero(n, d);
  Mat y_next(n, d);
  int sweeps = 0;
  for (;;) {
    ++sweeps;
    // candidate = W y - x/D, then running max with floor 0
    y_next.noalias() = y * w.transpose();
    y_next -= xd;
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        double cand = y_next(k, i);
        if (cand > acc) acc = cand;
        y_next(k, i) = acc;
      }
    }
    double diff = (y_next - y).cwiseAbs().maxCoeff();
    y.swap(y_next);
    if (diff <= tol) break;
    if (sweeps >= max_sweeps) {
      throw NoConvergenceError("reflection fixed point did not settle in " +
                               std::to_string(max_sweeps) + " sweeps");
    }
  }
  return finish(x, D, std::move(y), sweeps);
}

SPSolution solve_sp(const PiecewisePath& x, const Mat& D, double tol,
                    int max_sweeps) {
  check_inputs(x, D);
  if (x.dim() == 1) return solve_1d(x, D);
  return solve_sp_general(x, D, tol, max_sweeps);
}

PiecewisePath gamma_bar(const StaticPlan& plan, const PiecewisePath& x,
                        double tol, int max_sweeps) {
  SPSolution sol = solve_sp(x, plan.D, tol, max_sweeps);
  PiecewisePath out;
  out.t = x.t;
  out.interp = x.interp;
  Mat shift = plan.xstar.asDiagonal() * plan.spec.C.cast<double>().transpose();
  out.values = sol.y.values * shift.transpose();
  return out;
}

SPCheck verify_sp(const PiecewisePath& x, const Mat& D, const SPSolution& sol,
                  double eps) {
  SPCheck chk;
  const int n = x.size();
  const int d = x.dim();
  Mat resid = sol.z.values - x.values - sol.y.values * D.transpose();
  chk.equation_residual = max_abs(resid);
  chk.min_z = sol.z.values.minCoeff();
  chk.max_y_decrease = 0.0;
  Vec comp = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
      double dy = sol.y.values(k, i) - prev;
      prev = sol.y.values(k, i);
      if (dy < chk.max_y_decrease) chk.max_y_decrease = dy;
      if (dy > 0.0 && sol.z.values(k, i) > eps) comp(i) += dy;
    }
  }
  chk.complementarity = comp.maxCoeff();
  return chk;
}

}  // namespace spnet
