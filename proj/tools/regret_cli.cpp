#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "regretcov/bounds.hpp"
#include "regretcov/csv.hpp"
#include "regretcov/estimators.hpp"
#include "regretcov/harness.hpp"
#include "regretcov/portfolio.hpp"
#include "regretcov/spo.hpp"

using namespace regretcov;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// Rows of any toolkit CSV as an array of objects; numeric cells become
// numbers, empty cells null.
std::string csv_to_json(const std::string& text) {
  csv::Table table = csv::read_string(text);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj;
    for (std::size_t i = 0; i < table.header.size() && i < row.size(); ++i) {
      const std::string& cell = row[i];
      if (cell.empty()) {
        obj[table.header[i]] = nullptr;
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used == cell.size()) {
          obj[table.header[i]] = v;
          continue;
        }
      } catch (...) {
      }
      obj[table.header[i]] = cell;
    }
    rows.push_back(std::move(obj));
  }
  return rows.dump();
}

void write_table(const std::string& path, const std::string& csv_text, const std::string& format) {
  write_file(path, format == "json" ? csv_to_json(csv_text) : csv_text);
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ----------------------------------------------------------- simulate

struct SimulateArgs {
  std::string family;
  ExperimentConfig cfg;
  std::string out = "trace.csv";
  std::string summary_out;
  std::string format = "csv";
  std::string dump_pairs;
};

int run_simulate(const SimulateArgs& args) {
  auto family = family_from_name(args.family);
  if (!family) throw std::invalid_argument("unknown family " + args.family);
  ExperimentConfig cfg = args.cfg;
  cfg.family = *family;
  cfg.validate();

  std::optional<SamplePairs> archive;
  ConvergenceTrace trace = run_experiment(cfg, args.dump_pairs.empty() ? nullptr : &archive);
  write_table(args.out, trace.to_csv(), args.format);
  const std::string summary = trace.summary_json(cfg);
  if (!args.summary_out.empty()) write_file(args.summary_out, summary);
  if (archive) write_file(args.dump_pairs, archive->to_csv());
  std::cout << summary << '\n';
  return 0;
}

// ----------------------------------------------------------- estimate

struct EstimateArgs {
  std::string pairs_path;
  std::string method = "cov";
  std::string problem_path;
  int scenario_count = 100;
  Seed seed = 0;
  bool with_replacement = false;
  double level = 0.95;
  std::string grad = "auto";
  bool unbiased = false;
  std::string known_mean;
  std::string center = "sample";
};

GradPi resolve_grad(const std::string& mode, const Problem& problem) {
  if (mode == "zero") return GradPi::zero();
  if (mode == "fd") return GradPi::finite_difference();
  if (mode == "qp" || mode == "auto") {
    if (const auto* qp = dynamic_cast<const QpProblem*>(&problem)) {
      if (!qp->instance().constraints)
        return GradPi::analytic_qp(qp->instance().Q, qp->instance().risk_aversion);
      if (mode == "qp") throw std::invalid_argument("--grad qp needs an unconstrained instance");
      return GradPi::finite_difference();
    }
    if (mode == "qp") throw std::invalid_argument("--grad qp needs a qp problem");
    return GradPi::zero();  // piecewise-constant decision maps
  }
  throw std::invalid_argument("unknown --grad " + mode);
}

int run_estimate(const EstimateArgs& args) {
  SamplePairs pairs = SamplePairs::from_csv_file(args.pairs_path);
  if (!args.known_mean.empty()) pairs.known_mean = parse_vector(args.known_mean);

  std::unique_ptr<Problem> problem;
  if (!args.problem_path.empty()) problem = problem_from_json(read_file(args.problem_path));
  auto need_problem = [&]() -> const Problem& {
    if (!problem)
      throw std::invalid_argument("--method " + args.method + " requires --problem");
    return *problem;
  };

  const Normalization norm = args.unbiased ? Normalization::unbiased : Normalization::population;
  const Centering centering =
      args.center == "known" ? Centering::known_mean : Centering::sample_mean;
  if (args.method == "cov") {
    std::cout << cov_regret(pairs, norm, centering).to_json() << '\n';
  } else if (args.method == "saa") {
    std::cout << saa_regret(pairs.costs, need_problem(),
                            {args.scenario_count, args.seed, args.with_replacement})
                     .to_json()
              << '\n';
  } else if (args.method == "residual") {
    nlohmann::json j;
    j["value"] = residual_estimator(pairs, need_problem());
    j["method"] = "residual";
    j["n"] = pairs.size();
    std::cout << j.dump() << '\n';
  } else if (args.method == "corrected") {
    std::cout << corrected_regret(pairs, need_problem()).to_json() << '\n';
  } else if (args.method == "ci") {
    const Problem& p = need_problem();
    auto ci = clt_confidence_interval(pairs, p, resolve_grad(args.grad, p), args.level);
    std::cout << ci.to_json() << '\n';
  } else {
    throw std::invalid_argument("unknown --method " + args.method);
  }
  return 0;
}

// ---------------------------------------------------------------- spo

struct SpoArgs {
  int context_dim = 10;
  int grid_rows = 4, grid_cols = 4;
  int n_train = 200, n_val = 100, n_test = 100;
  double noise_sd = 0.3;
  Seed seed = 0;
  std::string out;
  std::string summary_out;
  std::string format = "csv";
  // train
  SpoTrainConfig train;
  std::string oracle = "cov";
  // bench
  int repetitions = 5;
  std::vector<int> scenario_counts = {10, 25, 50, 100, 200, 500};
};

SpoDataset make_dataset(const SpoArgs& args) {
  return generate_spo_data(args.context_dim, args.grid_rows, args.grid_cols,
                           {args.n_train, args.n_val, args.n_test}, args.noise_sd, args.seed);
}

int run_spo_train(SpoArgs& args) {
  if (args.oracle != "cov" && args.oracle != "saa")
    throw std::invalid_argument("--oracle must be cov or saa");
  args.train.oracle = args.oracle == "cov" ? OracleKind::cov : OracleKind::saa;
  args.train.seed = args.seed;
  SpoDataset data = make_dataset(args);
  SpoTrainResult result = train_spo(data, args.train);
  const std::string out = args.out.empty() ? "spo_train.csv" : args.out;
  write_table(out, result.log_csv(), args.format);
  const std::string summary = result.summary_json();
  if (!args.summary_out.empty()) write_file(args.summary_out, summary);
  std::cout << summary << '\n';
  return 0;
}

int run_spo_bench(SpoArgs& args) {
  SpoDataset data = make_dataset(args);
  auto rows = bench_oracles(data, args.scenario_counts, args.repetitions, args.seed);
  const std::string out = args.out.empty() ? "spo_bench.csv" : args.out;
  write_table(out, timings_to_csv(rows), args.format);
  nlohmann::json j;
  j["rows"] = rows.size();
  j["cov_ms"] = rows.front().mean_ms;
  j["max_speedup"] = 0.0;
  for (const auto& r : rows) j["max_speedup"] = std::max(j["max_speedup"].get<double>(), r.speedup);
  std::cout << j.dump() << '\n';
  return 0;
}

// ----------------------------------------------------------- portfolio

struct PortfolioArgs {
  std::string csv_path;
  bool synthetic = false;
  int n_stocks = 200, months = 120, factors = 3;
  int history_min = 60;
  RollingConfig rolling;
  Seed seed = 0;
  std::string out = "portfolio.csv";
  std::string summary_out;
  std::string format = "csv";
};

int run_portfolio(PortfolioArgs& args) {
  if (args.synthetic == !args.csv_path.empty())
    throw std::invalid_argument("portfolio run needs exactly one of --csv/--synthetic");
  args.rolling.seed = args.seed;

  ReturnsPanel panel;
  if (args.synthetic) {
    panel = synthetic_returns(args.n_stocks, args.months, args.factors, args.seed);
  } else {
    FilterConfig filter;
    filter.history_min = args.history_min;
    panel = load_and_filter(args.csv_path, filter);
  }
  RollingResult result = rolling_regret_experiment(panel, args.rolling);
  write_table(args.out, result.to_csv(), args.format);
  const std::string summary = result.summary_json(args.rolling);
  if (!args.summary_out.empty()) write_file(args.summary_out, summary);
  std::cout << summary << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regret estimation toolkit"};
  app.require_subcommand(1);
  std::function<int()> action;

  // simulate ---------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "run a seeded replication experiment");
  auto sim = std::make_shared<SimulateArgs>();
  simulate->add_option("family", sim->family, "lp | qp | qp-con | knapsack")->required();
  simulate->add_option("--n-vars", sim->cfg.n_vars);
  simulate->add_option("--n-cons", sim->cfg.n_constraints);
  simulate->add_option("--iters", sim->cfg.iterations);
  simulate->add_option("--lambda", sim->cfg.risk_aversion);
  simulate->add_option("--seed", sim->cfg.seed)->required();
  simulate->add_option("--sigma-scale", sim->cfg.sigma_scale);
  simulate->add_option("--weight-max", sim->cfg.knapsack_weight_max);
  simulate->add_option("--box-halfwidth", sim->cfg.qp_box_halfwidth);
  std::string mean_mode = "known";
  simulate->add_option("--mean-mode", mean_mode)->check(CLI::IsMember({"known", "estimated"}));
  simulate->add_option("--out", sim->out);
  simulate->add_option("--summary-out", sim->summary_out);
  simulate->add_option("--dump-pairs", sim->dump_pairs, "also write the (cost, decision) archive");
  simulate->add_option("--format", sim->format)->check(CLI::IsMember({"csv", "json"}));
  simulate->callback([&action, sim, &mean_mode] {
    sim->cfg.mean_mode = mean_mode == "known" ? MeanMode::known : MeanMode::estimated;
    action = [sim] { return run_simulate(*sim); };
  });

  // estimate ---------------------------------------------------------
  auto* estimate = app.add_subcommand("estimate", "estimate regret from a pairs archive");
  auto est = std::make_shared<EstimateArgs>();
  estimate->add_option("--pairs", est->pairs_path, "CSV with header c_0..c_{d-1},z_0..z_{d-1}")
      ->required();
  estimate->add_option("--method", est->method)
      ->check(CLI::IsMember({"cov", "saa", "residual", "corrected", "ci"}));
  estimate->add_option("--problem", est->problem_path, "instance JSON for solver-backed methods");
  estimate->add_option("--scenario-count", est->scenario_count);
  estimate->add_option("--seed", est->seed);
  estimate->add_flag("--with-replacement", est->with_replacement);
  estimate->add_option("--level", est->level);
  estimate->add_option("--grad", est->grad)->check(CLI::IsMember({"auto", "zero", "qp", "fd"}));
  estimate->add_flag("--unbiased", est->unbiased);
  estimate->add_option("--known-mean", est->known_mean, "comma-separated mean vector");
  estimate->add_option("--center", est->center, "cost-side centering for --method cov")
      ->check(CLI::IsMember({"sample", "known"}));
  estimate->callback([&action, est] { action = [est] { return run_estimate(*est); }; });

  // spo ---------------------------------------------------------------
  auto* spo = app.add_subcommand("spo", "contextual shortest-path training and benchmarks");
  spo->require_subcommand(1);
  auto spo_args = std::make_shared<SpoArgs>();
  auto add_dataset_flags = [&](CLI::App* cmd) {
    cmd->add_option("--p", spo_args->context_dim);
    cmd->add_option("--rows", spo_args->grid_rows);
    cmd->add_option("--cols", spo_args->grid_cols);
    cmd->add_option("--train", spo_args->n_train);
    cmd->add_option("--val", spo_args->n_val);
    cmd->add_option("--test", spo_args->n_test);
    cmd->add_option("--noise-sd", spo_args->noise_sd);
    cmd->add_option("--seed", spo_args->seed)->required();
    cmd->add_option("--out", spo_args->out);
    cmd->add_option("--summary-out", spo_args->summary_out);
    cmd->add_option("--format", spo_args->format)->check(CLI::IsMember({"csv", "json"}));
  };
  auto* spo_train_cmd = spo->add_subcommand("train", "train the rectified-linear predictor");
  add_dataset_flags(spo_train_cmd);
  spo_train_cmd->add_option("--epochs", spo_args->train.epochs);
  spo_train_cmd->add_option("--lr", spo_args->train.learning_rate);
  spo_train_cmd->add_option("--batch", spo_args->train.batch_size);
  spo_train_cmd->add_option("--eval-every", spo_args->train.eval_every);
  spo_train_cmd->add_option("--oracle", spo_args->oracle)
      ->check(CLI::IsMember({"cov", "saa"}));
  spo_train_cmd->add_option("--scenario-count", spo_args->train.scenario_count);
  spo_train_cmd->callback(
      [&action, spo_args] { action = [spo_args] { return run_spo_train(*spo_args); }; });

  auto* spo_bench_cmd = spo->add_subcommand("bench", "time the validation oracles");
  add_dataset_flags(spo_bench_cmd);
  spo_bench_cmd->add_option("--reps", spo_args->repetitions);
  spo_bench_cmd->add_option("--scenario-counts", spo_args->scenario_counts)->delimiter(',');
  spo_bench_cmd->callback(
      [&action, spo_args] { action = [spo_args] { return run_spo_bench(*spo_args); }; });

  // portfolio ----------------------------------------------------------
  auto* portfolio = app.add_subcommand("portfolio", "rolling mean-variance experiment");
  portfolio->require_subcommand(1);
  auto* prun = portfolio->add_subcommand("run", "run the rolling-window experiment");
  auto port = std::make_shared<PortfolioArgs>();
  prun->add_option("--csv", port->csv_path, "returns CSV date,ticker,ret[,price,mktcap]");
  prun->add_flag("--synthetic", port->synthetic, "generate a synthetic panel");
  prun->add_option("--n-stocks", port->n_stocks);
  prun->add_option("--months", port->months);
  prun->add_option("--factors", port->factors);
  prun->add_option("--history-min", port->history_min);
  prun->add_option("--window", port->rolling.window_months);
  prun->add_option("--portfolios", port->rolling.portfolios_per_month);
  prun->add_option("--stocks", port->rolling.stocks_per_portfolio);
  prun->add_option("--lambda", port->rolling.risk_aversion);
  prun->add_option("--seed", port->seed)->required();
  prun->add_option("--out", port->out);
  prun->add_option("--summary-out", port->summary_out);
  prun->add_option("--format", port->format)->check(CLI::IsMember({"csv", "json"}));
  prun->callback([&action, port] { action = [port] { return run_portfolio(*port); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return action ? action() : 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
