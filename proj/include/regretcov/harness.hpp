#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regretcov/estimators.hpp"
#include "regretcov/problems.hpp"

namespace regretcov {

enum class Family { lp, qp_unconstrained, qp_constrained, knapsack };

std::string family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

/// Which mean the benchmark decision is solved at: the generator's true
/// mean, or the running sample mean.
enum class MeanMode { known, estimated };

struct ExperimentConfig {
  Family family = Family::lp;
  int n_vars = 10;
  int n_constraints = 5;  // LP only
  long iterations = 5000;
  double risk_aversion = 1.0;  // QP families
  Seed seed = 0;
  MeanMode mean_mode = MeanMode::known;
  double sigma_scale = 1.0;
  double knapsack_weight_max = 10.0;
  /// Half-width of the box feasible region for the constrained QP family.
  double qp_box_halfwidth = 0.5;

  void validate() const;  // iterations >= 10, dimensions >= 1
};

struct TraceRow {
  long iter = 0;
  double running_empirical = 0.0;
  double running_cov = 0.0;
  std::optional<double> analytic;
  std::optional<double> residual_hat;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  struct Summary {
    double empirical = 0.0;
    double covariance = 0.0;
    double relative_gap = 0.0;  // |cov - emp| / max(|emp|, 1e-12)
    std::optional<double> analytic;
    bool sign_disagreement = false;
  } summary;

  std::string to_csv() const;
  std::string summary_json(const ExperimentConfig& cfg) const;
};

/// Fixed instance and cost law per experiment; a fresh cost draw and one
/// hindsight solve per iteration. Deterministic for fixed (config, seed).
/// When archive_out is set, the (cost, decision) pairs and the generator
/// mean are copied there for replay.
ConvergenceTrace run_lp_experiment(const ExperimentConfig& cfg,
                                   std::optional<SamplePairs>* archive_out = nullptr);
/// Quadratic term equals the sampled cost covariance. The unconstrained
/// family adds the closed-form covariance as a third trace line.
ConvergenceTrace run_qp_experiment(const ExperimentConfig& cfg,
                                   std::optional<SamplePairs>* archive_out = nullptr);
/// Item values are drawn around a fixed mean with independent noise; the
/// maximization is folded into the minimization convention by negating
/// values, so all estimator code paths are shared.
ConvergenceTrace run_knapsack_experiment(const ExperimentConfig& cfg,
                                         std::optional<SamplePairs>* archive_out = nullptr);

ConvergenceTrace run_experiment(const ExperimentConfig& cfg,
                                std::optional<SamplePairs>* archive_out = nullptr);

}  // namespace regretcov
