#include "regretcov/spo.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "regretcov/csv.hpp"

namespace regretcov {

namespace {

constexpr Seed kWeightsStream = 0x11;
constexpr Seed kContextStream = 0x12;
constexpr Seed kNoiseStream = 0x13;
constexpr Seed kShuffleStream = 0x100;
constexpr Seed kOracleStream = 0x1000;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

SamplePairs SpoDataset::val_pairs() const {
  return SamplePairs(costs.middleRows(n_train, n_val), hindsight.middleRows(n_train, n_val));
}

SamplePairs SpoDataset::test_pairs() const {
  return SamplePairs(costs.middleRows(n_train + n_val, n_test),
                     hindsight.middleRows(n_train + n_val, n_test));
}

SpoDataset generate_spo_data(int context_dim, int grid_rows, int grid_cols,
                             std::array<int, 3> sizes, double noise_sd, Seed seed) {
  if (context_dim < 1) throw std::invalid_argument("generate_spo_data: context_dim >= 1");
  if (sizes[0] < 1 || sizes[1] < 1 || sizes[2] < 1)
    throw std::invalid_argument("generate_spo_data: all split sizes must be >= 1");

  SpoDataset data;
  data.problem = std::make_shared<GridProblem>(build_grid(grid_rows, grid_cols));
  data.n_train = sizes[0];
  data.n_val = sizes[1];
  data.n_test = sizes[2];
  const int n = sizes[0] + sizes[1] + sizes[2];
  const int d = data.problem->dim();

  Rng wrng = Rng::for_task(seed, kWeightsStream);
  Eigen::MatrixXd true_weights(context_dim, d);
  for (int i = 0; i < context_dim; ++i)
    for (int j = 0; j < d; ++j) true_weights(i, j) = wrng.normal();

  Rng xrng = Rng::for_task(seed, kContextStream);
  data.contexts.resize(n, context_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < context_dim; ++j) data.contexts(i, j) = xrng.normal();

  Rng nrng = Rng::for_task(seed, kNoiseStream);
  data.costs.resize(n, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::RowVectorXd signal = data.contexts.row(i) * true_weights;
    for (int j = 0; j < d; ++j) {
      const double c = sigmoid(signal(j)) + noise_sd * nrng.normal();
      data.costs(i, j) = std::max(c, 1e-2);
    }
  }

  data.hindsight.resize(n, d);
  for (int i = 0; i < n; ++i)
    data.hindsight.row(i) = data.problem->solve(data.costs.row(i).transpose()).z.transpose();
  return data;
}

SpoLoss spo_plus_loss_and_subgradient(const Eigen::VectorXd& c_hat, const Eigen::VectorXd& c,
                                      const Eigen::VectorXd& z_star, const Problem& problem) {
  const Eigen::VectorXd aux = problem.solve(2.0 * c_hat - c).z;
  SpoLoss out;
  out.loss = c.dot(aux) - c.dot(z_star);
  out.subgradient = 2.0 * aux;
  return out;
}

double validation_oracle_cov(const SamplePairs& val_pairs) {
  // Allocation-free reductions keep the per-call cost at O(n d) flops.
  const double n = static_cast<double>(val_pairs.size());
  const double dot = (val_pairs.costs.array() * val_pairs.decisions.array()).sum();
  const double cross = val_pairs.costs.colwise().sum().dot(val_pairs.decisions.colwise().sum());
  return dot / n - cross / (n * n);
}

double validation_oracle_saa(const SamplePairs& val_pairs, const Problem& problem,
                             int scenario_count, Seed seed) {
  const long n = val_pairs.size();
  if (scenario_count < 1) throw std::invalid_argument("validation_oracle_saa: scenario_count >= 1");
  Rng rng(seed);
  std::vector<long> picks(static_cast<std::size_t>(scenario_count));
  if (scenario_count > n) {
    for (auto& p : picks) p = static_cast<long>(rng.index(static_cast<std::size_t>(n)));
  } else {
    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    for (int i = 0; i < scenario_count; ++i) {
      const auto j = i + static_cast<long>(rng.index(static_cast<std::size_t>(n - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      picks[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)];
    }
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(val_pairs.dim());
  double hindsight = 0.0;
  for (long p : picks) {
    mean += val_pairs.costs.row(p).transpose();
    hindsight += val_pairs.costs.row(p).dot(val_pairs.decisions.row(p));
  }
  mean /= static_cast<double>(scenario_count);
  const Eigen::VectorXd bench = problem.solve(mean).z;
  double cross = 0.0;
  for (long p : picks) cross += val_pairs.costs.row(p).transpose().dot(bench);
  return (hindsight - cross) / static_cast<double>(scenario_count);
}

SpoTrainResult train_spo(const SpoDataset& dataset, const SpoTrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("train_spo: epochs >= 1");
  if (config.batch_size < 1) throw std::invalid_argument("train_spo: batch_size >= 1");
  if (config.eval_every < 1) throw std::invalid_argument("train_spo: eval_every >= 1");

  const int p = dataset.context_dim();
  const int d = dataset.cost_dim();
  const Problem& problem = *dataset.problem;
  const SamplePairs val = dataset.val_pairs();

  Rng init_rng = Rng::for_task(config.seed, kWeightsStream);
  Eigen::MatrixXd weights(p, d);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < d; ++j) weights(i, j) = 0.1 * init_rng.normal();

  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(p, d);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(p, d);
  long adam_step = 0;

  SpoTrainResult result;
  result.epoch_train_loss.assign(static_cast<std::size_t>(config.epochs), 0.0);
  result.best_epoch = -1;

  const auto train_start = Clock::now();
  int eval_index = 0;

  auto evaluate = [&](int completed_epochs) {
    SpoEval ev;
    ev.epoch = completed_epochs;
    // One scenario draw per training run: checkpoints are compared on the
    // same validation scenarios, and a frozen model logs equal values.
    const Seed oracle_seed = config.seed ^ kOracleStream;
    if (config.oracle == OracleKind::cov) {
      const auto t0 = Clock::now();
      ev.val_regret_cov = validation_oracle_cov(val);
      ev.val_ms = ms_since(t0);
      ev.val_regret_saa = validation_oracle_saa(val, problem, config.scenario_count, oracle_seed);
    } else {
      const auto t0 = Clock::now();
      ev.val_regret_saa = validation_oracle_saa(val, problem, config.scenario_count, oracle_seed);
      ev.val_ms = ms_since(t0);
      ev.val_regret_cov = validation_oracle_cov(val);
    }
    result.val_overhead_seconds += ev.val_ms / 1000.0;
    const double selected =
        config.oracle == OracleKind::cov ? ev.val_regret_cov : ev.val_regret_saa;
    if (result.best_epoch < 0 || std::abs(selected) < std::abs(result.best_val_regret)) {
      result.best_epoch = completed_epochs;
      result.best_val_regret = selected;
      result.best_weights = weights;
    }
    result.evals.push_back(ev);
    ++eval_index;
  };

  std::vector<int> order(static_cast<std::size_t>(dataset.n_train));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch % config.eval_every == 0) evaluate(epoch);

    Rng shuffle_rng = Rng::for_task(config.seed, kShuffleStream + static_cast<Seed>(epoch));
    for (int i = dataset.n_train - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.index(static_cast<std::size_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double epoch_loss = 0.0;
    for (int start = 0; start < dataset.n_train; start += config.batch_size) {
      const int count = std::min(config.batch_size, dataset.n_train - start);
      Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(p, d);
      for (int b = 0; b < count; ++b) {
        const int row = order[static_cast<std::size_t>(start + b)];
        const Eigen::VectorXd x = dataset.contexts.row(row).transpose();
        const Eigen::VectorXd pre = weights.transpose() * x;
        const Eigen::VectorXd c_hat = pre.cwiseMax(0.0);
        const SpoLoss sl = spo_plus_loss_and_subgradient(
            c_hat, dataset.costs.row(row).transpose(), dataset.hindsight.row(row).transpose(),
            problem);
        epoch_loss += sl.loss;
        // Rectifier mask: no gradient where the pre-activation is <= 0.
        Eigen::VectorXd gated = sl.subgradient;
        for (int j = 0; j < d; ++j)
          if (pre(j) <= 0.0) gated(j) = 0.0;
        grad += x * gated.transpose() / static_cast<double>(count);
      }
      ++adam_step;
      m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad;
      m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad.cwiseProduct(grad);
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(adam_step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(adam_step));
      const Eigen::MatrixXd denom = (m2 / c2).cwiseSqrt().array() + config.adam_eps;
      weights -= config.learning_rate * (m1 / c1).cwiseQuotient(denom);
    }
    result.epoch_train_loss[static_cast<std::size_t>(epoch)] =
        epoch_loss / static_cast<double>(dataset.n_train);
  }

  result.train_seconds =
      std::chrono::duration<double>(Clock::now() - train_start).count();
  result.test_abs_regret = std::abs(cov_regret(dataset.test_pairs()).value);
  return result;
}

std::string SpoTrainResult::log_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_regret_cov,val_regret_saa,val_ms\n";
  std::size_t e = 0;
  for (std::size_t epoch = 0; epoch < epoch_train_loss.size(); ++epoch) {
    out << epoch << ',' << csv::format_double(epoch_train_loss[epoch]);
    if (e < evals.size() && evals[e].epoch == static_cast<int>(epoch)) {
      out << ',' << csv::format_double(evals[e].val_regret_cov) << ','
          << csv::format_double(evals[e].val_regret_saa) << ','
          << csv::format_double(evals[e].val_ms);
      ++e;
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string SpoTrainResult::summary_json() const {
  nlohmann::json j;
  j["best_epoch"] = best_epoch;
  j["best_val_regret"] = best_val_regret;
  j["test_abs_regret"] = test_abs_regret;
  j["train_seconds"] = train_seconds;
  j["val_overhead_seconds"] = val_overhead_seconds;
  return j.dump();
}

std::vector<OracleTiming> bench_oracles(const SpoDataset& dataset,
                                        const std::vector<int>& scenario_counts,
                                        int repetitions, Seed seed) {
  if (repetitions < 2) throw std::invalid_argument("bench_oracles: repetitions >= 2");
  const SamplePairs val = dataset.val_pairs();
  const Problem& problem = *dataset.problem;

  // Per-repetition mean over enough inner calls to resolve the clock, then
  // median of those means; the warm-up call never counts.
  auto measure = [&](auto&& call) {
    call();  // warm-up
    const auto probe = Clock::now();
    call();
    const double est_ms = std::max(ms_since(probe), 1e-6);
    const int inner = std::clamp(static_cast<int>(std::ceil(10.0 / est_ms)), 8, 20000);
    std::vector<double> reps(static_cast<std::size_t>(repetitions));
    for (int r = 0; r < repetitions; ++r) {
      const auto t0 = Clock::now();
      for (int k = 0; k < inner; ++k) call();
      reps[static_cast<std::size_t>(r)] = ms_since(t0) / inner;
    }
    std::vector<double> sorted = reps;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    double mean = 0.0;
    for (double v : reps) mean += v;
    mean /= static_cast<double>(repetitions);
    double var = 0.0;
    for (double v : reps) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(repetitions - 1));
    return std::pair<double, double>{median, sd};
  };

  std::vector<OracleTiming> out;
  volatile double sink = 0.0;

  OracleTiming cov_row;
  cov_row.oracle = "cov";
  cov_row.repetitions = repetitions;
  auto [cov_ms, cov_sd] = measure([&] { sink = validation_oracle_cov(val); });
  cov_row.mean_ms = cov_ms;
  cov_row.std_ms = cov_sd;
  cov_row.speedup = 1.0;
  out.push_back(cov_row);

  int call_id = 0;
  for (int b : scenario_counts) {
    OracleTiming row;
    row.oracle = "saa";
    row.scenario_count = b;
    row.repetitions = repetitions;
    auto [ms, sd] = measure([&] {
      sink = validation_oracle_saa(val, problem, b,
                                   seed ^ (kOracleStream + static_cast<Seed>(call_id++)));
    });
    row.mean_ms = ms;
    row.std_ms = sd;
    row.speedup = ms / cov_ms;
    out.push_back(row);
  }
  (void)sink;
  return out;
}

std::string timings_to_csv(const std::vector<OracleTiming>& rows) {
  std::ostringstream out;
  out << "oracle,scenario_count,latency_ms_mean,latency_ms_std,speedup\n";
  for (const auto& r : rows) {
    out << r.oracle << ',';
    if (r.scenario_count) out << *r.scenario_count;
    out << ',' << csv::format_double(r.mean_ms) << ',' << csv::format_double(r.std_ms) << ','
        << csv::format_double(r.speedup) << '\n';
  }
  return out.str();
}

}  // namespace regretcov
