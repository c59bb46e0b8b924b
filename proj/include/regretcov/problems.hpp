#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regretcov/prob.hpp"
#include "regretcov/simplex.hpp"

namespace regretcov {

class Singular : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GenerationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolveStatus { optimal, tie_broken };

struct DecisionVector {
  Eigen::VectorXd z;
  double objective = 0.0;
  SolveStatus status = SolveStatus::optimal;
};

/**
 * Linear program  min c'z  s.t.  A z (<= | =) b  [, z >= 0].
 *
 * Construction validates that the feasible region is nonempty and bounded:
 * a zero-cost solve establishes feasibility and coordinate-range solves
 * establish boundedness. Instances are immutable afterwards.
 */
class LpInstance {
 public:
  LpInstance(Eigen::MatrixXd A, Eigen::VectorXd b, bool nonneg = true);
  LpInstance(Eigen::MatrixXd A, Eigen::VectorXd b, std::vector<RowSense> senses,
             bool nonneg);

  int num_vars() const { return static_cast<int>(A_.cols()); }
  int num_constraints() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  const std::vector<RowSense>& senses() const { return senses_; }
  bool nonneg() const { return nonneg_; }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  std::vector<RowSense> senses_;
  bool nonneg_;
};

/// Vertex solution via two-phase simplex with Bland's rule; ties are
/// resolved deterministically and flagged through the status field.
DecisionVector solve_lp(const LpInstance& inst, const Eigen::VectorXd& cost);

/**
 * Random instance in the form  A z <= b, z >= 0  with A standard normal and
 * b = |standard normal| + 1, so the origin is always feasible. Draws whose
 * feasible region is unbounded are rejected and redrawn; after 100
 * rejections GenerationFailed is thrown.
 */
LpInstance random_lp(int n_vars, int n_constraints, Seed seed);

/// Inequality system A z <= b with an optional z >= 0 restriction,
/// used as the feasible region of constrained quadratic programs.
struct Polyhedron {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  bool nonneg = false;

  static Polyhedron box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
};

/**
 * Quadratic decision problem with decision map
 *
 *     pi(c) = argmin_z  c'z + 0.5 z'(Q + lambda I) z    (over the
 * polyhedron when one is present).
 *
 * Q must be symmetric positive semidefinite and lambda >= 0; the
 * unconstrained map is the linear solve (Q + lambda I) z = -c.
 */
struct QpInstance {
  Eigen::MatrixXd Q;
  double risk_aversion = 0.0;  // lambda
  std::optional<Polyhedron> constraints;

  QpInstance(Eigen::MatrixXd Q_in, double lambda,
             std::optional<Polyhedron> constraints_in = std::nullopt);
  int dim() const { return static_cast<int>(Q.rows()); }
  Eigen::MatrixXd regularized() const {
    return Q + risk_aversion * Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
  }
};

/// Closed form -(Q + lambda I)^{-1} c; requires no constraints.
DecisionVector solve_qp_unconstrained(const QpInstance& inst, const Eigen::VectorXd& cost);

/// Primal active-set method warm-started from the unconstrained solution;
/// the result satisfies the KKT conditions to 1e-8.
DecisionVector solve_qp_constrained(const QpInstance& inst, const Eigen::VectorXd& cost);

/// Dispatch on the presence of constraints.
DecisionVector solve_qp(const QpInstance& inst, const Eigen::VectorXd& cost);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max() const;
};

/// KKT residuals of a candidate solution for a constrained QP.
KktResiduals qp_kkt_residuals(const QpInstance& inst, const Eigen::VectorXd& cost,
                              const Eigen::VectorXd& z, const Eigen::VectorXd& multipliers);

/// 0/1 knapsack with real-valued weights.
struct KnapsackInstance {
  Eigen::VectorXd weights;  // all positive
  double capacity = 0.0;

  KnapsackInstance(Eigen::VectorXd weights_in, double capacity_in);
  /// Replication constructor: capacity = half the total weight.
  static KnapsackInstance half_capacity(Eigen::VectorXd weights_in);
  int num_items() const { return static_cast<int>(weights.size()); }
};

/// Exact maximizer of values'z subject to weights'z <= capacity,
/// z in {0,1}^d, via branch and bound with a fractional relaxation bound.
/// The reported objective is values'z.
DecisionVector solve_knapsack(const KnapsackInstance& inst, const Eigen::VectorXd& values);

/**
 * Directed grid graph with edges running rightward and downward; unit flow
 * from the top-left node to the bottom-right node. rows x cols nodes,
 * rows*(cols-1) + cols*(rows-1) edges.
 */
struct GridFlowInstance {
  int rows = 0, cols = 0;
  Eigen::MatrixXd incidence;                  // nodes x edges, +1 out / -1 in
  std::vector<std::pair<int, int>> edges;     // (from, to) node ids
  int source = 0, sink = 0;

  int num_nodes() const { return rows * cols; }
  int num_edges() const { return static_cast<int>(edges.size()); }
};

GridFlowInstance build_grid(int rows, int cols);

/// Shortest-path LP view: min c'z, N z = b, z >= 0 with N the incidence
/// matrix and b the unit source-to-sink supply.
LpInstance grid_lp_view(const GridFlowInstance& grid);

/**
 * Decision oracle pi(c) = argmin over the feasible set of the instance's
 * objective at cost c. Implementations are deterministic; solve() counts
 * invocations so tests and estimators can audit how many optimization
 * solves a code path performs.
 */
class Problem {
 public:
  Problem() = default;
  // Copies start with a fresh instrumentation counter.
  Problem(const Problem&) noexcept {}
  Problem& operator=(const Problem&) noexcept { return *this; }
  virtual ~Problem() = default;
  virtual int dim() const = 0;

  DecisionVector solve(const Eigen::VectorXd& cost) const {
    ++solve_count_;
    return do_solve(cost);
  }
  long solve_count() const { return solve_count_.load(); }
  void reset_solve_count() const { solve_count_.store(0); }

 private:
  virtual DecisionVector do_solve(const Eigen::VectorXd& cost) const = 0;
  mutable std::atomic<long> solve_count_{0};
};

class LpProblem final : public Problem {
 public:
  explicit LpProblem(LpInstance inst) : inst_(std::move(inst)) {}
  int dim() const override { return inst_.num_vars(); }
  const LpInstance& instance() const { return inst_; }

 private:
  DecisionVector do_solve(const Eigen::VectorXd& cost) const override {
    return solve_lp(inst_, cost);
  }
  LpInstance inst_;
};

class QpProblem final : public Problem {
 public:
  explicit QpProblem(QpInstance inst) : inst_(std::move(inst)) {}
  int dim() const override { return inst_.dim(); }
  const QpInstance& instance() const { return inst_; }

 private:
  DecisionVector do_solve(const Eigen::VectorXd& cost) const override {
    return solve_qp(inst_, cost);
  }
  QpInstance inst_;
};

/// Minimization convention: solve(cost) maximizes (-cost)'z, so archives of
/// (cost, decision) pairs share the sign convention of the other problems.
class KnapsackProblem final : public Problem {
 public:
  explicit KnapsackProblem(KnapsackInstance inst) : inst_(std::move(inst)) {}
  int dim() const override { return inst_.num_items(); }
  const KnapsackInstance& instance() const { return inst_; }

 private:
  DecisionVector do_solve(const Eigen::VectorXd& cost) const override;
  KnapsackInstance inst_;
};

/// Axis-aligned box: the cost sign picks the active bound per coordinate.
/// Equivalent to the simplex on the same box but O(d) per solve.
class BoxProblem final : public Problem {
 public:
  BoxProblem(Eigen::VectorXd lower, Eigen::VectorXd upper);
  int dim() const override { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

 private:
  DecisionVector do_solve(const Eigen::VectorXd& cost) const override;
  Eigen::VectorXd lower_, upper_;
};

class GridProblem final : public Problem {
 public:
  explicit GridProblem(GridFlowInstance grid)
      : grid_(std::move(grid)), lp_(grid_lp_view(grid_)) {}
  int dim() const override { return grid_.num_edges(); }
  const GridFlowInstance& grid() const { return grid_; }

 private:
  DecisionVector do_solve(const Eigen::VectorXd& cost) const override {
    return solve_lp(lp_, cost);
  }
  GridFlowInstance grid_;
  LpInstance lp_;
};

/// JSON round trip for replay and bug reports.
/// Schema: {type, A, b, Q, lambda, weights, capacity, rows, cols}.
std::string instance_to_json(const LpInstance& inst);
std::string instance_to_json(const QpInstance& inst);
std::string instance_to_json(const KnapsackInstance& inst);
std::string instance_to_json(const GridFlowInstance& inst);
std::unique_ptr<Problem> problem_from_json(const std::string& text);

}  // namespace regretcov
