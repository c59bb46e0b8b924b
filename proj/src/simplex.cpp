#include "regretcov/simplex.hpp"

#include <cmath>
#include <limits>

namespace regretcov {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr long kMaxPivots = 200000;

struct Tableau {
  Eigen::MatrixXd body;      // m x ncols
  Eigen::VectorXd rhs;       // m, kept >= 0
  Eigen::VectorXd cost;      // reduced-cost row, ncols
  double shift = 0.0;        // objective of the current basis
  std::vector<int> basis;    // basic column per row
  std::vector<bool> live;    // false for dropped redundant rows
  std::vector<bool> usable;  // false for retired (artificial) columns
  int m = 0, ncols = 0;

  void pivot(int row, int col) {
    const double p = body(row, col);
    body.row(row) /= p;
    rhs(row) /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row || !live[i]) continue;
      const double f = body(i, col);
      if (f != 0.0) {
        body.row(i) -= f * body.row(row);
        rhs(i) -= f * rhs(row);
        if (rhs(i) < 0.0 && rhs(i) > -1e-11) rhs(i) = 0.0;
      }
    }
    const double fc = cost(col);
    if (fc != 0.0) {
      cost -= fc * body.row(row).transpose();
      shift -= fc * rhs(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule: smallest improving column, then smallest basic index
  // among the minimum-ratio rows. Returns false at optimality.
  bool iterate() {
    int enter = -1;
    for (int j = 0; j < ncols; ++j) {
      if (usable[j] && cost(j) < -kCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return false;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (!live[i]) continue;
      const double a = body(i, enter);
      if (a > kPivotTol) {
        const double ratio = rhs(i) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 &&
             (leave < 0 || basis[static_cast<std::size_t>(i)] <
                               basis[static_cast<std::size_t>(leave)]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw Unbounded("simplex: improving direction has no blocking row");
    pivot(leave, enter);
    return true;
  }

  void run() {
    for (long k = 0; k < kMaxPivots; ++k)
      if (!iterate()) return;
    throw std::runtime_error("simplex: pivot limit exceeded");
  }
};

}  // namespace

SimplexResult simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const std::vector<RowSense>& senses,
                            const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m || static_cast<int>(senses.size()) != m || c.size() != n)
    throw std::invalid_argument("simplex_solve: dimension mismatch");

  // Normalize to b >= 0; a flipped "<=" becomes ">=", needing surplus +
  // artificial columns.
  enum class Kind { le, ge, eq };
  std::vector<Kind> kind(static_cast<std::size_t>(m));
  Eigen::MatrixXd an = A;
  Eigen::VectorXd bn = b;
  for (int i = 0; i < m; ++i) {
    Kind k = senses[static_cast<std::size_t>(i)] == RowSense::eq ? Kind::eq : Kind::le;
    if (bn(i) < 0.0) {
      an.row(i) = -an.row(i);
      bn(i) = -bn(i);
      if (k == Kind::le) k = Kind::ge;
    }
    kind[static_cast<std::size_t>(i)] = k;
  }

  int n_slack = 0, n_art = 0;
  for (auto k : kind) {
    if (k != Kind::eq) ++n_slack;
    if (k != Kind::le) ++n_art;
  }
  const int ncols = n + n_slack + n_art;

  Tableau t;
  t.m = m;
  t.ncols = ncols;
  t.body = Eigen::MatrixXd::Zero(m, ncols);
  t.body.leftCols(n) = an;
  t.rhs = bn;
  t.basis.assign(static_cast<std::size_t>(m), -1);
  t.live.assign(static_cast<std::size_t>(m), true);
  t.usable.assign(static_cast<std::size_t>(ncols), true);

  int slack_at = n, art_at = n + n_slack;
  const int first_art = art_at;
  for (int i = 0; i < m; ++i) {
    switch (kind[static_cast<std::size_t>(i)]) {
      case Kind::le:
        t.body(i, slack_at) = 1.0;
        t.basis[static_cast<std::size_t>(i)] = slack_at++;
        break;
      case Kind::ge:
        t.body(i, slack_at++) = -1.0;
        [[fallthrough]];
      case Kind::eq:
        t.body(i, art_at) = 1.0;
        t.basis[static_cast<std::size_t>(i)] = art_at++;
        break;
    }
  }

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    t.cost = Eigen::VectorXd::Zero(ncols);
    t.cost.segment(first_art, n_art).setOnes();
    t.shift = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t.basis[static_cast<std::size_t>(i)] >= first_art) {
        t.cost -= t.body.row(i).transpose();
        t.shift -= t.rhs(i);
      }
    }
    t.run();
    if (-t.shift > 1e-7) throw Infeasible("simplex: phase 1 optimum positive");

    // Drive artificials out of the basis; rows that cannot pivot are
    // redundant and get dropped.
    for (int i = 0; i < m; ++i) {
      if (t.basis[static_cast<std::size_t>(i)] < first_art) continue;
      int col = -1;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(t.body(i, j)) > 1e-7) {
          col = j;
          break;
        }
      }
      if (col >= 0)
        t.pivot(i, col);
      else
        t.live[static_cast<std::size_t>(i)] = false;
    }
    for (int j = first_art; j < ncols; ++j) t.usable[static_cast<std::size_t>(j)] = false;
  }

  // Phase 2.
  t.cost = Eigen::VectorXd::Zero(ncols);
  t.cost.head(n) = c;
  t.shift = 0.0;
  for (int i = 0; i < m; ++i) {
    if (!t.live[static_cast<std::size_t>(i)]) continue;
    const int bj = t.basis[static_cast<std::size_t>(i)];
    if (bj < n && c(bj) != 0.0) {
      t.cost -= c(bj) * t.body.row(i).transpose();
      t.shift -= c(bj) * t.rhs(i);
    }
  }
  t.run();

  SimplexResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> is_basic(static_cast<std::size_t>(ncols), false);
  for (int i = 0; i < m; ++i) {
    if (!t.live[static_cast<std::size_t>(i)]) continue;
    const int bj = t.basis[static_cast<std::size_t>(i)];
    is_basic[static_cast<std::size_t>(bj)] = true;
    if (bj < n) res.x(bj) = t.rhs(i);
  }
  res.objective = c.dot(res.x);
  for (int j = 0; j < ncols && !res.alternate_optima; ++j) {
    if (t.usable[static_cast<std::size_t>(j)] && !is_basic[static_cast<std::size_t>(j)] &&
        std::abs(t.cost(j)) <= kCostTol)
      res.alternate_optima = true;
  }
  return res;
}

SimplexResult simplex_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c) {
  return simplex_solve(A, b, std::vector<RowSense>(static_cast<std::size_t>(A.rows()), RowSense::le), c);
}

}  // namespace regretcov
