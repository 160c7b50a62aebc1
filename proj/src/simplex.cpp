#include "chainplan/simplex.hpp"

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <vector>

namespace chainplan::lp {

FeasibilityResult find_feasible_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (b.size() != m) throw std::invalid_argument("rhs size does not match constraint rows");

  // Tableau [A | I | b] with rows sign-flipped so that b >= 0.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, n + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = b[i] < 0.0 ? -1.0 : 1.0;
    T.row(i).head(n) = s * A.row(i);
    T(i, n + i) = 1.0;
    T(i, n + m) = s * b[i];
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  // Reduced costs of min sum(artificials); last entry holds -objective.
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(n + m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    cost.head(n) -= T.row(i).head(n);
    cost[n + m] -= T(i, n + m);
  }

  const double scale = std::max(1.0, b.lpNorm<1>());
  const double piv_tol = 1e-12;
  FeasibilityResult res;
  const int max_pivots = 50 * static_cast<int>(n + m) + 100;
  while (res.pivots < max_pivots) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j)
      if (cost[j] < -tol) {
        enter = j;
        break;
      }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (T(i, enter) <= piv_tol) continue;
      const double ratio = T(i, n + m) / T(i, enter);
      if (ratio < best - 1e-15 ||
          (ratio <= best + 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best = std::min(best, ratio);
        leave = i;
      }
    }
    if (leave < 0) break;  // unbounded direction; cannot happen for a bounded-below phase-I objective

    T.row(leave) /= T(leave, enter);
    for (Eigen::Index i = 0; i < m; ++i)
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    if (cost[enter] != 0.0) cost -= cost[enter] * T.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
    ++res.pivots;
  }

  const double infeasibility = -cost[n + m];
  res.feasible = infeasibility <= tol * scale;
  res.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = basis[static_cast<std::size_t>(i)];
    if (k < n) res.x[k] = std::max(0.0, T(i, n + m));
  }
  return res;
}

}  // namespace chainplan::lp
