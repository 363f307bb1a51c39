#pragma once
#include <vector>

#include "spnet/linalg.hpp"

namespace spnet {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double objective = 0.0;
};

// min c.x  s.t.  Aeq x = beq,  Ain x <= bin,  x >= 0.
// Two-phase dense primal simplex, Bland's rule, so it terminates on
// degenerate problems. Sized for small dense programs (tens of variables).
LpResult solve_lp(const Vec& c, const Mat& Aeq, const Vec& beq,
                  const Mat& Ain, const Vec& bin);

// All vertices of {x >= 0 : Aeq x = beq, Ain x <= bin}, found by enumerating
// active sets. complete = false when max_systems square solves would be
// exceeded; vertices is then empty.
struct VertexEnumResult {
  std::vector<Vec> vertices;
  bool complete = true;
};
VertexEnumResult enumerate_vertices(const Mat& Aeq, const Vec& beq,
                                    const Mat& Ain, const Vec& bin,
                                    double tol = 1e-8,
                                    long max_systems = 2000000);

}  // namespace spnet
