#include "regretcov/estimators.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

#include "regretcov/csv.hpp"

namespace regretcov {

SamplePairs::SamplePairs(Eigen::MatrixXd costs_in, Eigen::MatrixXd decisions_in,
                         std::optional<Eigen::VectorXd> known_mean_in)
    : costs(std::move(costs_in)), decisions(std::move(decisions_in)),
      known_mean(std::move(known_mean_in)) {
  if (costs.rows() != decisions.rows() || costs.cols() != decisions.cols())
    throw std::invalid_argument("SamplePairs: costs/decisions shape mismatch");
  if (costs.rows() < 1) throw InsufficientSamples("SamplePairs: need n >= 1");
  if (known_mean && known_mean->size() != costs.cols())
    throw std::invalid_argument("SamplePairs: known_mean dimension mismatch");
}

SamplePairs SamplePairs::from_costs(const Eigen::MatrixXd& costs, const Problem& problem,
                                    std::optional<Eigen::VectorXd> known_mean) {
  if (costs.cols() != problem.dim())
    throw std::invalid_argument("SamplePairs::from_costs: dimension mismatch");
  Eigen::MatrixXd decisions(costs.rows(), costs.cols());
  for (Eigen::Index i = 0; i < costs.rows(); ++i)
    decisions.row(i) = problem.solve(costs.row(i).transpose()).z.transpose();
  return SamplePairs(costs, std::move(decisions), std::move(known_mean));
}

SamplePairs SamplePairs::from_csv_string(const std::string& text) {
  csv::Table table = csv::read_string(text);
  const std::size_t width = table.header.size();
  if (width == 0 || width % 2 != 0)
    throw SchemaError("pairs CSV: expected header c_0..c_{d-1},z_0..z_{d-1}");
  const std::size_t d = width / 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (table.header[j] != "c_" + std::to_string(j) ||
        table.header[d + j] != "z_" + std::to_string(j))
      throw SchemaError("pairs CSV: expected header c_0..c_{d-1},z_0..z_{d-1}");
  }
  const std::size_t n = table.rows.size();
  if (n == 0) throw SchemaError("pairs CSV: no data rows");
  Eigen::MatrixXd costs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::MatrixXd decisions(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (table.rows[i].size() != width) throw SchemaError("pairs CSV: ragged row");
    for (std::size_t j = 0; j < d; ++j) {
      costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::stod(table.rows[i][j]);
      decisions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::stod(table.rows[i][d + j]);
    }
  }
  return SamplePairs(std::move(costs), std::move(decisions));
}

SamplePairs SamplePairs::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("pairs CSV: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv_string(buf.str());
}

std::string SamplePairs::to_csv() const {
  std::ostringstream out;
  const int d = dim();
  for (int j = 0; j < d; ++j) out << "c_" << j << ",";
  for (int j = 0; j < d; ++j) out << "z_" << j << (j + 1 < d ? "," : "\n");
  for (long i = 0; i < size(); ++i) {
    for (int j = 0; j < d; ++j) out << csv::format_double(costs(i, j)) << ",";
    for (int j = 0; j < d; ++j)
      out << csv::format_double(decisions(i, j)) << (j + 1 < d ? "," : "\n");
  }
  return out.str();
}

std::string method_name(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::cov: return "cov";
    case EstimatorMethod::empirical: return "empirical";
    case EstimatorMethod::saa: return "saa";
    case EstimatorMethod::analytic: return "analytic";
    case EstimatorMethod::corrected: return "corrected";
  }
  return "unknown";
}

std::string RegretEstimate::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["method"] = method_name(method);
  j["n"] = n;
  if (std_error) j["stderr"] = *std_error;
  if (ci) j["ci"] = {ci->first, ci->second};
  if (solves > 0) j["solves"] = solves;
  return j.dump();
}

CovAccumulator::CovAccumulator(int dim)
    : mean_cost_(Eigen::VectorXd::Zero(dim)), mean_decision_(Eigen::VectorXd::Zero(dim)) {}

void CovAccumulator::add(const Eigen::VectorXd& cost, const Eigen::VectorXd& decision) {
  ++n_;
  const Eigen::VectorXd cost_delta = cost - mean_cost_;
  mean_cost_ += cost_delta / static_cast<double>(n_);
  mean_decision_ += (decision - mean_decision_) / static_cast<double>(n_);
  // Centering one side at the updated mean makes the running co-moment
  // exact; a constant stream contributes exactly zero.
  comoment_ += cost_delta.dot(decision - mean_decision_);
}

double CovAccumulator::value(Normalization norm) const {
  if (n_ < 1) return 0.0;
  if (norm == Normalization::population) return comoment_ / static_cast<double>(n_);
  return n_ > 1 ? comoment_ / static_cast<double>(n_ - 1) : 0.0;
}

double CovAccumulator::value_centered_at(const Eigen::VectorXd& mean) const {
  if (n_ < 1) return 0.0;
  // (1/n) sum (c_i - mu)' z_i = comoment/n + (cbar - mu)' zbar.
  return comoment_ / static_cast<double>(n_) + (mean_cost_ - mean).dot(mean_decision_);
}

RegretEstimate cov_regret(const SamplePairs& pairs, Normalization norm, Centering centering) {
  if (centering == Centering::known_mean && !pairs.known_mean)
    throw std::invalid_argument("cov_regret: known-mean centering without a known mean");
  CovAccumulator acc(pairs.dim());
  const long n = pairs.size();
  for (long i = 0; i < n; ++i)
    acc.add(pairs.costs.row(i).transpose(), pairs.decisions.row(i).transpose());
  RegretEstimate est;
  est.method = EstimatorMethod::cov;
  est.n = n;
  est.value = centering == Centering::known_mean ? acc.value_centered_at(*pairs.known_mean)
                                                 : acc.value(norm);
  return est;
}

RegretEstimate empirical_regret(const Eigen::MatrixXd& costs, const Problem& problem,
                                const std::optional<Eigen::VectorXd>& known_mean) {
  const long n = costs.rows();
  if (n < 1) throw InsufficientSamples("empirical_regret: need n >= 1");
  const Eigen::VectorXd benchmark_mean =
      known_mean ? *known_mean : Eigen::VectorXd(costs.colwise().mean().transpose());
  const Eigen::VectorXd z_bench = problem.solve(benchmark_mean).z;

  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n; ++i) {
    const Eigen::VectorXd c = costs.row(i).transpose();
    const double term = c.dot(problem.solve(c).z) - c.dot(z_bench);
    sum += term;
    sum_sq += term * term;
  }
  RegretEstimate est;
  est.method = EstimatorMethod::empirical;
  est.n = n;
  est.value = sum / static_cast<double>(n);
  if (n > 1) {
    const double var = (sum_sq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1);
    est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  est.solves = n + 1;
  return est;
}

RegretEstimate saa_regret(const Eigen::MatrixXd& costs, const Problem& problem,
                          const SaaOptions& options) {
  const long n = costs.rows();
  const int scenario_count = options.scenario_count;
  if (scenario_count < 1) throw std::invalid_argument("saa_regret: scenario_count must be >= 1");
  if (!options.with_replacement && scenario_count > n)
    throw std::invalid_argument("saa_regret: scenario_count exceeds archive without replacement");

  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(options.seed);
  std::vector<long> picks(static_cast<std::size_t>(scenario_count));
  if (options.with_replacement) {
    for (auto& p : picks) p = static_cast<long>(rng.index(static_cast<std::size_t>(n)));
  } else {
    // Partial Fisher-Yates over the row indices.
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    for (int i = 0; i < scenario_count; ++i) {
      const auto j = i + static_cast<long>(rng.index(static_cast<std::size_t>(n - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      picks[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)];
    }
  }

  Eigen::VectorXd scenario_mean = Eigen::VectorXd::Zero(costs.cols());
  for (long p : picks) scenario_mean += costs.row(p).transpose();
  scenario_mean /= static_cast<double>(scenario_count);

  double hindsight = 0.0;
  for (long p : picks) {
    const Eigen::VectorXd c = costs.row(p).transpose();
    hindsight += c.dot(problem.solve(c).z);
  }
  const Eigen::VectorXd z_bench = problem.solve(scenario_mean).z;
  double benchmark = 0.0;
  for (long p : picks) benchmark += costs.row(p).transpose().dot(z_bench);

  RegretEstimate est;
  est.method = EstimatorMethod::saa;
  est.n = scenario_count;
  est.value = (hindsight - benchmark) / static_cast<double>(scenario_count);
  est.solves = scenario_count + 1;
  est.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

double qp_analytic_cov(const Eigen::MatrixXd& Q, double risk_aversion,
                       const CovarianceMatrix& sigma) {
  if (Q.rows() != Q.cols() || Q.rows() != sigma.dim())
    throw std::invalid_argument("qp_analytic_cov: dimension mismatch");
  const Eigen::MatrixXd H =
      Q + risk_aversion * Eigen::MatrixXd::Identity(Q.rows(), Q.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw Singular("qp_analytic_cov: Q + lambda I is not positive definite");
  return -llt.solve(sigma.matrix()).trace();
}

double residual_estimator(const SamplePairs& pairs, const Problem& problem) {
  if (pairs.size() < 2) throw InsufficientSamples("residual_estimator: need n >= 2");
  const Eigen::VectorXd cbar = pairs.costs.colwise().mean().transpose();
  const Eigen::VectorXd zbar = pairs.decisions.colwise().mean().transpose();
  return cbar.dot(zbar - problem.solve(cbar).z);
}

RegretEstimate corrected_regret(const SamplePairs& pairs, const Problem& problem) {
  if (pairs.size() < 2) throw InsufficientSamples("corrected_regret: need n >= 2");
  RegretEstimate est = cov_regret(pairs);
  est.value += residual_estimator(pairs, problem);
  est.method = EstimatorMethod::corrected;
  est.solves = 1;
  return est;
}

}  // namespace regretcov
