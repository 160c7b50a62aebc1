#pragma once

#include <Eigen/Core>

namespace chainplan::lp {

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd x;  // a point with A x = b, x >= 0 when feasible
  int pivots = 0;
};

/// Phase-I simplex on { x >= 0 : A x = b } with Bland's anti-cycling rule.
///
/// One artificial variable per row; the problem is feasible iff the minimal sum of
/// artificials is at most tol * max(1, |b|_1).
FeasibilityResult find_feasible_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol = 1e-9);

}  // namespace chainplan::lp
