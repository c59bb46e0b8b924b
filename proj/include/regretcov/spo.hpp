#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regretcov/estimators.hpp"
#include "regretcov/problems.hpp"

namespace regretcov {

/**
 * Contextual shortest-path dataset over a directed grid: standard-normal
 * contexts, costs sigmoid(x W) plus Gaussian noise clipped from below at
 * 1e-2, and hindsight decisions pre-solved and cached. Rows are ordered
 * train | validation | test.
 */
struct SpoDataset {
  Eigen::MatrixXd contexts;   // n x p
  Eigen::MatrixXd costs;      // n x d
  Eigen::MatrixXd hindsight;  // n x d cached optimal decisions
  int n_train = 0, n_val = 0, n_test = 0;
  std::shared_ptr<GridProblem> problem;

  int context_dim() const { return static_cast<int>(contexts.cols()); }
  int cost_dim() const { return static_cast<int>(costs.cols()); }

  SamplePairs val_pairs() const;
  SamplePairs test_pairs() const;
};

SpoDataset generate_spo_data(int context_dim = 10, int grid_rows = 4, int grid_cols = 4,
                             std::array<int, 3> sizes = {200, 100, 100},
                             double noise_sd = 0.3, Seed seed = 0);

struct SpoLoss {
  double loss = 0.0;
  Eigen::VectorXd subgradient;  // with respect to the predicted costs
};

/**
 * Surrogate decision loss c' z(2c_hat - c) - c' z_star with one auxiliary
 * solve at cost 2c_hat - c; the subgradient is 2 z(2c_hat - c), treated as
 * constant in c_hat. Nonnegative whenever z_star is optimal for c.
 */
SpoLoss spo_plus_loss_and_subgradient(const Eigen::VectorXd& c_hat, const Eigen::VectorXd& c,
                                      const Eigen::VectorXd& z_star, const Problem& problem);

/// Sample covariance over the cached validation pairs; zero solves.
double validation_oracle_cov(const SamplePairs& val_pairs);

/// Scenario average over cached hindsight terms minus the objective of the
/// single solve at the scenario mean; exactly one solve. Scenarios are
/// drawn without replacement, or with replacement when scenario_count
/// exceeds the validation size.
double validation_oracle_saa(const SamplePairs& val_pairs, const Problem& problem,
                             int scenario_count, Seed seed);

enum class OracleKind { cov, saa };

struct SpoTrainConfig {
  double learning_rate = 5e-3;
  int batch_size = 16;
  int epochs = 20;
  int eval_every = 2;
  OracleKind oracle = OracleKind::cov;
  int scenario_count = 50;  // SAA oracle only
  Seed seed = 0;
  // Adaptive-moment defaults; only the learning rate is typically tuned.
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
};

struct SpoEval {
  int epoch = 0;  // number of completed epochs at evaluation time
  double val_regret_cov = 0.0;
  double val_regret_saa = 0.0;
  double val_ms = 0.0;  // wall time of the configured oracle's call
};

struct SpoTrainResult {
  Eigen::MatrixXd best_weights;
  int best_epoch = 0;
  double best_val_regret = 0.0;
  double test_abs_regret = 0.0;
  double train_seconds = 0.0;
  double val_overhead_seconds = 0.0;
  std::vector<double> epoch_train_loss;
  std::vector<SpoEval> evals;

  /// epoch, train_loss, val_regret_cov, val_regret_saa, val_ms
  std::string log_csv() const;
  std::string summary_json() const;
};

/**
 * Rectified-linear predictor trained with adaptive-moment stochastic
 * subgradient steps on the surrogate loss; the rectifier mask gates the
 * chain rule, with the zero branch taken at exactly zero pre-activation.
 * Validation runs after every eval_every completed epochs (including the
 * untrained model at epoch 0); the checkpoint with the smallest absolute
 * validation regret is selected, earliest epoch on ties.
 */
SpoTrainResult train_spo(const SpoDataset& dataset, const SpoTrainConfig& config);

struct OracleTiming {
  std::string oracle;  // "cov" | "saa"
  std::optional<int> scenario_count;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double speedup = 1.0;  // relative to the cov oracle
  int repetitions = 0;
};

/**
 * Per-call latency of both validation oracles, warm-up excluded, median of
 * per-repetition means across repetitions. The cov oracle is measured once;
 * one row per scenario count for the scenario-based oracle.
 */
std::vector<OracleTiming> bench_oracles(const SpoDataset& dataset,
                                        const std::vector<int>& scenario_counts,
                                        int repetitions, Seed seed);

std::string timings_to_csv(const std::vector<OracleTiming>& rows);

}  // namespace regretcov
