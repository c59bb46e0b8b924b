#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>

#include "regretcov/prob.hpp"
#include "regretcov/problems.hpp"

namespace regretcov {

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Archive of n historical (cost, decision) pairs, one per row. When the
 * generating distribution's mean is known it can be attached; estimators
 * that need a benchmark decision then solve at that mean instead of the
 * sample mean.
 */
struct SamplePairs {
  Eigen::MatrixXd costs;      // n x d
  Eigen::MatrixXd decisions;  // n x d
  std::optional<Eigen::VectorXd> known_mean;

  SamplePairs(Eigen::MatrixXd costs_in, Eigen::MatrixXd decisions_in,
              std::optional<Eigen::VectorXd> known_mean_in = std::nullopt);

  long size() const { return costs.rows(); }
  int dim() const { return static_cast<int>(costs.cols()); }

  /// Solve the hindsight decision for every cost row.
  static SamplePairs from_costs(const Eigen::MatrixXd& costs, const Problem& problem,
                                std::optional<Eigen::VectorXd> known_mean = std::nullopt);

  /// CSV with header c_0..c_{d-1},z_0..z_{d-1}.
  static SamplePairs from_csv_string(const std::string& text);
  static SamplePairs from_csv_file(const std::string& path);
  std::string to_csv() const;
};

enum class EstimatorMethod { cov, empirical, saa, analytic, corrected };

std::string method_name(EstimatorMethod m);

struct RegretEstimate {
  double value = 0.0;
  EstimatorMethod method = EstimatorMethod::cov;
  long n = 0;
  std::optional<double> std_error;
  std::optional<std::pair<double, double>> ci;  // (lo, hi)
  long solves = 0;
  double wall_ms = 0.0;

  /// {value, method, n, stderr?, ci?}
  std::string to_json() const;
};

/// 1/n matches the population definition; 1/(n-1) is available behind the
/// flag for users who want the unbiased sample covariance.
enum class Normalization { population, unbiased };

/// Which mean centers the cost side of the covariance. The decision side is
/// always centered at the sample mean of the decisions.
enum class Centering { sample_mean, known_mean };

/// One-pass accumulator for the scalar cost-decision covariance: running
/// means of c and z plus the running centered co-moment, nothing else.
class CovAccumulator {
 public:
  explicit CovAccumulator(int dim);

  void add(const Eigen::VectorXd& cost, const Eigen::VectorXd& decision);
  long count() const { return n_; }

  double value(Normalization norm = Normalization::population) const;
  /// Cost side centered at a fixed mean instead of the sample mean.
  double value_centered_at(const Eigen::VectorXd& mean) const;
  const Eigen::VectorXd& mean_cost() const { return mean_cost_; }
  const Eigen::VectorXd& mean_decision() const { return mean_decision_; }

 private:
  Eigen::VectorXd mean_cost_, mean_decision_;
  double comoment_ = 0.0;
  long n_ = 0;
};

/// Single traversal of an arbitrary pair source; pair_at(i) must yield the
/// i-th (cost, decision) pair and is called exactly once per index.
template <class PairFn>
double cov_regret_stream(long n, int dim, PairFn&& pair_at,
                         Normalization norm = Normalization::population) {
  CovAccumulator acc(dim);
  for (long i = 0; i < n; ++i) {
    auto [cost, decision] = pair_at(i);
    acc.add(cost, decision);
  }
  return acc.value(norm);
}

/// Sample covariance between costs and decisions, computed in one pass.
RegretEstimate cov_regret(const SamplePairs& pairs,
                          Normalization norm = Normalization::population,
                          Centering centering = Centering::sample_mean);

/**
 * Mean realized objective minus the objective of the benchmark decision:
 * (1/n) sum c_i' pi(c_i) - (1/n) sum c_i' pi(mu), with mu the attached
 * known mean when present and the sample mean otherwise.
 */
RegretEstimate empirical_regret(const Eigen::MatrixXd& costs, const Problem& problem,
                                const std::optional<Eigen::VectorXd>& known_mean = std::nullopt);

struct SaaOptions {
  int scenario_count = 0;
  Seed seed = 0;
  bool with_replacement = false;
};

/**
 * Scenario-based estimate over a subsample of the archive: solves the
 * problem once per selected scenario plus once at the scenario mean
 * (scenario_count + 1 solves total, recorded along with wall-clock time).
 */
RegretEstimate saa_regret(const Eigen::MatrixXd& costs, const Problem& problem,
                          const SaaOptions& options);

/// -tr((Q + lambda I)^{-1} Sigma): the covariance in closed form for the
/// linear-solve decision map; zero optimization solves.
double qp_analytic_cov(const Eigen::MatrixXd& Q, double risk_aversion,
                       const CovarianceMatrix& sigma);

/// cbar' ( mean decision - pi(cbar) ); exactly one extra solve.
double residual_estimator(const SamplePairs& pairs, const Problem& problem);

/// Covariance estimate plus the residual estimate.
RegretEstimate corrected_regret(const SamplePairs& pairs, const Problem& problem);

}  // namespace regretcov
