#include "regretcov/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "regretcov/csv.hpp"

namespace regretcov {

namespace {

// Stream ids xor-ed into the experiment seed; one independent stream per
// random ingredient so config changes do not shift unrelated draws.
constexpr Seed kInstanceStream = 0x1;
constexpr Seed kMeanStream = 0x2;
constexpr Seed kSigmaStream = 0x3;
constexpr Seed kCostStream = 0x4;

struct RunningState {
  CovAccumulator acc;
  double sum_hindsight = 0.0;  // sum of c_i' z_i
  double sum_gap = 0.0;        // sum of c_i' (z_i - bench), known-mean path
  explicit RunningState(int dim) : acc(dim) {}
};

bool sign_disagrees(double a, double b) {
  return a * b < 0.0 && std::abs(a) > 1e-12 && std::abs(b) > 1e-12;
}

// Shared iteration loop once the problem, cost matrix and benchmark policy
// are fixed. benchmark_known is ignored in estimated mode.
ConvergenceTrace run_trace(const ExperimentConfig& cfg, const Problem& problem,
                           const Eigen::MatrixXd& costs, const Eigen::VectorXd& known_mean,
                           std::optional<double> analytic,
                           std::optional<SamplePairs>* archive_out) {
  const long iters = cfg.iterations;
  const int d = static_cast<int>(costs.cols());
  const long checkpoint_stride = std::max(1L, iters / 20);

  Eigen::VectorXd bench;
  if (cfg.mean_mode == MeanMode::known) bench = problem.solve(known_mean).z;

  ConvergenceTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(iters));
  RunningState state(d);
  Eigen::MatrixXd decisions;
  if (archive_out) decisions.resize(iters, d);

  for (long k = 1; k <= iters; ++k) {
    const Eigen::VectorXd c = costs.row(k - 1).transpose();
    const Eigen::VectorXd z = problem.solve(c).z;
    if (archive_out) decisions.row(k - 1) = z.transpose();
    state.acc.add(c, z);
    state.sum_hindsight += c.dot(z);

    TraceRow row;
    row.iter = k;
    if (cfg.mean_mode == MeanMode::known) {
      state.sum_gap += c.dot(z - bench);
      row.running_empirical = state.sum_gap / static_cast<double>(k);
    } else {
      const Eigen::VectorXd bench_k = problem.solve(state.acc.mean_cost()).z;
      row.running_empirical =
          state.sum_hindsight / static_cast<double>(k) - state.acc.mean_cost().dot(bench_k);
    }
    row.running_cov = state.acc.value();
    row.analytic = analytic;
    if (k % checkpoint_stride == 0 || k == iters) {
      const Eigen::VectorXd cbar = state.acc.mean_cost();
      row.residual_hat = cbar.dot(state.acc.mean_decision() - problem.solve(cbar).z);
    }
    trace.rows.push_back(std::move(row));
  }

  if (archive_out) *archive_out = SamplePairs(costs, std::move(decisions), known_mean);

  const TraceRow& last = trace.rows.back();
  trace.summary.empirical = last.running_empirical;
  trace.summary.covariance = last.running_cov;
  trace.summary.relative_gap = std::abs(last.running_cov - last.running_empirical) /
                               std::max(std::abs(last.running_empirical), 1e-12);
  trace.summary.analytic = analytic;
  trace.summary.sign_disagreement = sign_disagrees(last.running_cov, last.running_empirical);
  return trace;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::lp: return "lp";
    case Family::qp_unconstrained: return "qp";
    case Family::qp_constrained: return "qp-con";
    case Family::knapsack: return "knapsack";
  }
  return "unknown";
}

std::optional<Family> family_from_name(const std::string& name) {
  if (name == "lp") return Family::lp;
  if (name == "qp") return Family::qp_unconstrained;
  if (name == "qp-con") return Family::qp_constrained;
  if (name == "knapsack") return Family::knapsack;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (iterations < 10) throw std::invalid_argument("ExperimentConfig: iterations must be >= 10");
  if (n_vars < 1 || n_constraints < 1)
    throw std::invalid_argument("ExperimentConfig: dimensions must be >= 1");
  if (risk_aversion < 0.0) throw std::invalid_argument("ExperimentConfig: lambda must be >= 0");
  if (sigma_scale <= 0.0) throw std::invalid_argument("ExperimentConfig: sigma scale must be > 0");
}

ConvergenceTrace run_lp_experiment(const ExperimentConfig& cfg,
                                   std::optional<SamplePairs>* archive_out) {
  cfg.validate();
  if (cfg.family != Family::lp) throw std::invalid_argument("run_lp_experiment: wrong family");

  LpProblem problem(random_lp(cfg.n_vars, cfg.n_constraints, cfg.seed ^ kInstanceStream));
  Rng mean_rng = Rng::for_task(cfg.seed, kMeanStream);
  Eigen::VectorXd mean(cfg.n_vars);
  for (int j = 0; j < cfg.n_vars; ++j) mean(j) = mean_rng.normal();
  CostDistribution dist(mean, random_pd_matrix(cfg.n_vars, cfg.seed ^ kSigmaStream, cfg.sigma_scale));
  const Eigen::MatrixXd costs =
      sample_costs(dist, static_cast<int>(cfg.iterations), cfg.seed ^ kCostStream);
  return run_trace(cfg, problem, costs, mean, std::nullopt, archive_out);
}

ConvergenceTrace run_qp_experiment(const ExperimentConfig& cfg,
                                   std::optional<SamplePairs>* archive_out) {
  cfg.validate();
  if (cfg.family != Family::qp_unconstrained && cfg.family != Family::qp_constrained)
    throw std::invalid_argument("run_qp_experiment: wrong family");

  Rng mean_rng = Rng::for_task(cfg.seed, kMeanStream);
  Eigen::VectorXd mean(cfg.n_vars);
  for (int j = 0; j < cfg.n_vars; ++j) mean(j) = mean_rng.normal();
  CovarianceMatrix sigma = random_pd_matrix(cfg.n_vars, cfg.seed ^ kSigmaStream, cfg.sigma_scale);

  std::optional<Polyhedron> constraints;
  std::optional<double> analytic;
  if (cfg.family == Family::qp_constrained) {
    constraints = Polyhedron::box(Eigen::VectorXd::Constant(cfg.n_vars, -cfg.qp_box_halfwidth),
                                  Eigen::VectorXd::Constant(cfg.n_vars, cfg.qp_box_halfwidth));
  } else {
    analytic = qp_analytic_cov(sigma.matrix(), cfg.risk_aversion, sigma);
  }
  QpProblem problem(QpInstance(sigma.matrix(), cfg.risk_aversion, std::move(constraints)));

  CostDistribution dist(mean, sigma);
  const Eigen::MatrixXd costs =
      sample_costs(dist, static_cast<int>(cfg.iterations), cfg.seed ^ kCostStream);
  return run_trace(cfg, problem, costs, mean, analytic, archive_out);
}

ConvergenceTrace run_knapsack_experiment(const ExperimentConfig& cfg,
                                         std::optional<SamplePairs>* archive_out) {
  cfg.validate();
  if (cfg.family != Family::knapsack)
    throw std::invalid_argument("run_knapsack_experiment: wrong family");

  const int d = cfg.n_vars;
  Rng inst_rng = Rng::for_task(cfg.seed, kInstanceStream);
  Eigen::VectorXd weights(d);
  for (int j = 0; j < d; ++j) weights(j) = inst_rng.uniform(1.0, cfg.knapsack_weight_max);
  KnapsackProblem problem(KnapsackInstance::half_capacity(std::move(weights)));

  Rng mean_rng = Rng::for_task(cfg.seed, kMeanStream);
  Eigen::VectorXd value_mean(d);
  for (int j = 0; j < d; ++j) value_mean(j) = mean_rng.uniform(1.0, 10.0);
  CovarianceMatrix sigma(2.0 * Eigen::MatrixXd::Identity(d, d));
  CostDistribution values(value_mean, std::move(sigma));

  // Costs are negated values; the benchmark mean follows the same sign.
  Eigen::MatrixXd costs =
      -sample_costs(values, static_cast<int>(cfg.iterations), cfg.seed ^ kCostStream);
  return run_trace(cfg, problem, costs, -value_mean, std::nullopt, archive_out);
}

ConvergenceTrace run_experiment(const ExperimentConfig& cfg,
                                std::optional<SamplePairs>* archive_out) {
  switch (cfg.family) {
    case Family::lp: return run_lp_experiment(cfg, archive_out);
    case Family::qp_unconstrained:
    case Family::qp_constrained: return run_qp_experiment(cfg, archive_out);
    case Family::knapsack: return run_knapsack_experiment(cfg, archive_out);
  }
  throw std::invalid_argument("run_experiment: unknown family");
}

std::string ConvergenceTrace::to_csv() const {
  const bool has_analytic = !rows.empty() && rows.front().analytic.has_value();
  std::ostringstream out;
  out << "iter,running_empirical,running_cov";
  if (has_analytic) out << ",analytic";
  out << ",residual_hat\n";
  for (const TraceRow& r : rows) {
    out << r.iter << ',' << csv::format_double(r.running_empirical) << ','
        << csv::format_double(r.running_cov);
    if (has_analytic) out << ',' << csv::format_double(*r.analytic);
    out << ',';
    if (r.residual_hat) out << csv::format_double(*r.residual_hat);
    out << '\n';
  }
  return out.str();
}

std::string ConvergenceTrace::summary_json(const ExperimentConfig& cfg) const {
  nlohmann::json j;
  j["family"] = family_name(cfg.family);
  j["iterations"] = cfg.iterations;
  j["seed"] = cfg.seed;
  j["empirical"] = summary.empirical;
  j["covariance"] = summary.covariance;
  j["relative_gap"] = summary.relative_gap;
  if (summary.analytic) j["analytic"] = *summary.analytic;
  j["sign_disagreement"] = summary.sign_disagreement;
  return j.dump();
}

}  // namespace regretcov
