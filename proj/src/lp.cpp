#include "spnet/lp.hpp"

#include <algorithm>
#include <cmath>

#include "spnet/errors.hpp"

namespace spnet {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// Tableau simplex on  min c.x, T x = b, x >= 0  with a known feasible basis.
// Returns false when unbounded. Bland's rule throughout.
bool run_simplex(Mat& t, Vec& b, Vec& c, double& obj, std::vector<int>& basis) {
  const int m = static_cast<int>(t.rows());
  const int n = static_cast<int>(t.cols());
  // reduced costs for the current basis
  Vec red = c;
  Vec y = Vec::Zero(m);  // c_B after elimination is kept zero by pivoting below
  (void)y;
  for (;;) {
    int enter = -1;
    for (int j = 0; j < n; ++j) {
      if (red(j) < -kCostTol) {
        enter = j;
        break;  // Bland: smallest index
      }
    }
    if (enter < 0) return true;
    int leave_row = -1;
    double best_ratio = 0.0;
    int leave_var = -1;
    for (int r = 0; r < m; ++r) {
      if (t(r, enter) > kPivotTol) {
        double ratio = b(r) / t(r, enter);
        if (leave_row < 0 || ratio < best_ratio - kPivotTol ||
            (std::abs(ratio - best_ratio) <= kPivotTol &&
             basis[r] < leave_var)) {
          leave_row = r;
          best_ratio = ratio;
          leave_var = basis[r];
        }
      }
    }
    if (leave_row < 0) return false;  // unbounded
    // pivot (leave_row, enter)
    double piv = t(leave_row, enter);
    t.row(leave_row) /= piv;
    b(leave_row) /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == leave_row) continue;
      double f = t(r, enter);
      if (f != 0.0) {
        t.row(r) -= f * t.row(leave_row);
        b(r) -= f * b(leave_row);
      }
    }
    double fc = red(enter);
    red -= fc * t.row(leave_row).transpose();
    obj -= fc * b(leave_row);
    basis[leave_row] = enter;
  }
}

}  // namespace

LpResult solve_lp(const Vec& c, const Mat& Aeq, const Vec& beq,
                  const Mat& Ain, const Vec& bin) {
  const int n = static_cast<int>(c.size());
  const int me = static_cast<int>(Aeq.rows());
  const int mi = static_cast<int>(Ain.rows());
  const int m = me + mi;
  const int n_slack = mi;
  const int n_tot = n + n_slack + m;  // structurals, slacks, artificials

  Mat t = Mat::Zero(m, n_tot);
  Vec b(m);
  if (me > 0) {
    t.block(0, 0, me, n) = Aeq;
    b.head(me) = beq;
  }
  if (mi > 0) {
    t.block(me, 0, mi, n) = Ain;
    t.block(me, n, mi, mi) = Mat::Identity(mi, mi);
    b.tail(mi) = bin;
  }
  for (int r = 0; r < m; ++r) {
    if (b(r) < 0.0) {
      t.row(r) = -t.row(r);
      b(r) = -b(r);
    }
    t(r, n + n_slack + r) = 1.0;
  }

  // Phase I: minimize the artificial sum from the all-artificial basis.
  std::vector<int> basis(m);
  Vec c1 = Vec::Zero(n_tot);
  double obj1 = 0.0;
  for (int r = 0; r < m; ++r) {
    basis[r] = n + n_slack + r;
    c1.segment(0, n + n_slack) -= t.row(r).segment(0, n + n_slack).transpose();
    obj1 -= b(r);
  }
  // c1 holds reduced costs wrt the artificial basis; artificial columns stay 0
  if (!run_simplex(t, b, c1, obj1, basis)) {
    return {LpStatus::Unbounded, Vec(), 0.0};  // cannot happen in phase I
  }
  double scale = std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 1.0);
  if (-obj1 > 1e-7 * scale) {
    LpResult res;
    res.status = LpStatus::Infeasible;
    return res;
  }
  // Drive leftover artificials out of the basis; drop dependent rows.
  std::vector<int> keep_rows;
  for (int r = 0; r < m; ++r) {
    if (basis[r] < n + n_slack) {
      keep_rows.push_back(r);
      continue;
    }
    int piv_col = -1;
    for (int j = 0; j < n + n_slack; ++j) {
      if (std::abs(t(r, j)) > 1e-7) {
        piv_col = j;
        break;
      }
    }
    if (piv_col < 0) continue;  // redundant constraint row
    double piv = t(r, piv_col);
    t.row(r) /= piv;
    b(r) /= piv;
    for (int r2 = 0; r2 < m; ++r2) {
      if (r2 == r) continue;
      double f = t(r2, piv_col);
      if (f != 0.0) {
        t.row(r2) -= f * t.row(r);
        b(r2) -= f * b(r);
      }
    }
    basis[r] = piv_col;
    keep_rows.push_back(r);
  }
  if (static_cast<int>(keep_rows.size()) < m) {
    Mat t2(keep_rows.size(), n_tot);
    Vec b2(keep_rows.size());
    std::vector<int> basis2;
    for (size_t i = 0; i < keep_rows.size(); ++i) {
      t2.row(i) = t.row(keep_rows[i]);
      b2(i) = b(keep_rows[i]);
      basis2.push_back(basis[keep_rows[i]]);
    }
    t = std::move(t2);
    b = std::move(b2);
    basis = std::move(basis2);
  }
  const int m2 = static_cast<int>(t.rows());

  // Phase II on structurals + slacks; artificial columns are frozen out.
  Vec c2 = Vec::Zero(n_tot);
  c2.head(n) = c;
  double obj2 = 0.0;
  for (int r = 0; r < m2; ++r) {
    double cb = c2(basis[r]);
    if (cb != 0.0) {
      c2 -= cb * t.row(r).transpose();
      obj2 -= cb * b(r);
    }
  }
  for (int j = n + n_slack; j < n_tot; ++j) c2(j) = 1e30;  // never re-enter
  if (!run_simplex(t, b, c2, obj2, basis)) {
    LpResult res;
    res.status = LpStatus::Unbounded;
    return res;
  }

  LpResult res;
  res.status = LpStatus::Optimal;
  res.x = Vec::Zero(n);
  for (int r = 0; r < m2; ++r) {
    if (basis[r] < n) res.x(basis[r]) = b(r);
  }
  res.objective = -obj2;
  return res;
}

VertexEnumResult enumerate_vertices(const Mat& Aeq, const Vec& beq,
                                    const Mat& Ain, const Vec& bin, double tol,
                                    long max_systems) {
  const int n = static_cast<int>(std::max(Aeq.cols(), Ain.cols()));
  VertexEnumResult out;

  int rank_eq = 0;
  if (Aeq.rows() > 0) {
    Eigen::FullPivLU<Mat> lu(Aeq);
    lu.setThreshold(1e-10);
    rank_eq = static_cast<int>(lu.rank());
  }
  int s = n - rank_eq;  // extra active constraints needed for a vertex
  const int n_cand = n + static_cast<int>(Ain.rows());
  if (s < 0) s = 0;
  if (s > n_cand) return out;

  // count C(n_cand, s) against the budget
  double combos = 1.0;
  for (int i = 0; i < s; ++i) combos = combos * (n_cand - i) / (i + 1);
  if (combos > static_cast<double>(max_systems)) {
    out.complete = false;
    return out;
  }

  std::vector<int> pick(s);
  for (int i = 0; i < s; ++i) pick[i] = i;
  auto advance = [&]() -> bool {
    int i = s - 1;
    while (i >= 0 && pick[i] == n_cand - s + i) --i;
    if (i < 0) return false;
    ++pick[i];
    for (int k = i + 1; k < s; ++k) pick[k] = pick[k - 1] + 1;
    return true;
  };

  const int me = static_cast<int>(Aeq.rows());
  Mat sys(me + s, n);
  Vec rhs(me + s);
  if (me > 0) {
    sys.topRows(me) = Aeq;
    rhs.head(me) = beq;
  }
  bool more = true;
  if (s == 0 && n_cand >= 0) more = true;
  while (more) {
    for (int i = 0; i < s; ++i) {
      int cidx = pick[i];
      if (cidx < n) {
        sys.row(me + i).setZero();
        sys(me + i, cidx) = 1.0;
        rhs(me + i) = 0.0;
      } else {
        sys.row(me + i) = Ain.row(cidx - n);
        rhs(me + i) = bin(cidx - n);
      }
    }
    Eigen::FullPivLU<Mat> lu(sys);
    lu.setThreshold(1e-10);
    if (static_cast<int>(lu.rank()) == n) {
      Vec x = lu.solve(rhs);
      bool feas = (sys * x - rhs).cwiseAbs().maxCoeff() <= tol;
      if (feas && x.minCoeff() >= -tol) {
        if (me > 0 && (Aeq * x - beq).cwiseAbs().maxCoeff() > tol) feas = false;
        if (feas && Ain.rows() > 0) {
          feas = ((Ain * x - bin).maxCoeff() <= tol);
        }
        if (feas) {
          bool fresh = true;
          for (const Vec& v : out.vertices) {
            if ((v - x).cwiseAbs().maxCoeff() <= 100 * tol) {
              fresh = false;
              break;
            }
          }
          if (fresh) out.vertices.push_back(x);
        }
      }
    }
    if (s == 0) break;
    more = advance();
  }
  return out;
}

}  // namespace spnet
