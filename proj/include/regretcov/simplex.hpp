#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace regretcov {

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Unbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RowSense { le, eq };

struct SimplexResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  /// A nonbasic column with zero reduced cost exists: the optimal face has
  /// more than one vertex and the returned one was chosen by Bland's rule.
  bool alternate_optima = false;
};

/**
 * Dense two-phase primal simplex for
 *
 *     min c'x   s.t.   A x (<= | =) b,   x >= 0.
 *
 * Entering and leaving variables follow Bland's smallest-index rule
 * throughout, which both prevents cycling on degenerate problems and makes
 * every solve deterministic, including tie cases. Redundant equality rows
 * are detected at the end of phase 1 and dropped.
 *
 * Throws Infeasible / Unbounded.
 */
SimplexResult simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const std::vector<RowSense>& senses,
                            const Eigen::VectorXd& c);

/// Convenience overload: all rows "<=".
SimplexResult simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c);

}  // namespace regretcov
