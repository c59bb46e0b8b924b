#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regretcov/bounds.hpp"
#include "regretcov/estimators.hpp"
#include "regretcov/harness.hpp"
#include "regretcov/portfolio.hpp"
#include "regretcov/prob.hpp"
#include "regretcov/spo.hpp"

namespace py = pybind11;
using namespace regretcov;

namespace {

// Pairs + an optional known mean, the common estimator input from Python.
SamplePairs make_pairs(const Eigen::MatrixXd& costs, const Eigen::MatrixXd& decisions,
                       std::optional<Eigen::VectorXd> known_mean) {
  return SamplePairs(costs, decisions, std::move(known_mean));
}

py::dict estimate_to_dict(const RegretEstimate& est) {
  py::dict d;
  d["value"] = est.value;
  d["method"] = method_name(est.method);
  d["n"] = est.n;
  if (est.std_error) d["stderr"] = *est.std_error;
  d["solves"] = est.solves;
  return d;
}

py::dict trace_to_dict(const ConvergenceTrace& trace) {
  py::dict d;
  const std::size_t n = trace.rows.size();
  Eigen::VectorXd emp(n), cov(n);
  for (std::size_t i = 0; i < n; ++i) {
    emp(static_cast<Eigen::Index>(i)) = trace.rows[i].running_empirical;
    cov(static_cast<Eigen::Index>(i)) = trace.rows[i].running_cov;
  }
  d["running_empirical"] = emp;
  d["running_cov"] = cov;
  d["empirical"] = trace.summary.empirical;
  d["covariance"] = trace.summary.covariance;
  d["relative_gap"] = trace.summary.relative_gap;
  if (trace.summary.analytic) d["analytic"] = *trace.summary.analytic;
  d["sign_disagreement"] = trace.summary.sign_disagreement;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regret estimation via the cost-decision covariance";

  // ------------------------------------------------------------- errors
  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefiniteError");
  py::register_exception<Infeasible>(m, "InfeasibleError");
  py::register_exception<Unbounded>(m, "UnboundedError");
  py::register_exception<InsufficientSamples>(m, "InsufficientSamplesError");

  // ---------------------------------------------------------- prob core
  m.def("cholesky_factor", &cholesky_factor, py::arg("cov"),
        "Lower-triangular factor L with L @ L.T == cov");
  m.def(
      "sample_costs",
      [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int n, Seed seed) {
        return sample_costs(CostDistribution(mean, CovarianceMatrix(cov)), n, seed);
      },
      py::arg("mean"), py::arg("cov"), py::arg("n"), py::arg("seed"),
      "n Gaussian draws, one per row; bit-identical for equal seeds");
  m.def(
      "random_pd_matrix",
      [](int dim, Seed seed, double scale) { return random_pd_matrix(dim, seed, scale).matrix(); },
      py::arg("dim"), py::arg("seed"), py::arg("scale") = 1.0);

  // ------------------------------------------------------------ problems
  py::class_<DecisionVector>(m, "Decision")
      .def_readonly("z", &DecisionVector::z)
      .def_readonly("objective", &DecisionVector::objective)
      .def_property_readonly("tie_broken", [](const DecisionVector& d) {
        return d.status == SolveStatus::tie_broken;
      });

  py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
      .def("solve", &Problem::solve, py::arg("cost"))
      .def("dim", &Problem::dim)
      .def_property_readonly("solve_count", &Problem::solve_count);

  m.def(
      "lp_problem",
      [](const Eigen::MatrixXd& A, const Eigen::VectorXd& b, bool nonneg) {
        return std::shared_ptr<Problem>(new LpProblem(LpInstance(A, b, nonneg)));
      },
      py::arg("A"), py::arg("b"), py::arg("nonneg") = true,
      "min c'z over {A z <= b, z >= 0 when nonneg}");
  m.def(
      "random_lp_problem",
      [](int n_vars, int n_constraints, Seed seed) {
        return std::shared_ptr<Problem>(new LpProblem(random_lp(n_vars, n_constraints, seed)));
      },
      py::arg("n_vars"), py::arg("n_constraints"), py::arg("seed"));
  m.def(
      "qp_problem",
      [](const Eigen::MatrixXd& Q, double lam, std::optional<Eigen::VectorXd> lower,
         std::optional<Eigen::VectorXd> upper) {
        std::optional<Polyhedron> constraints;
        if (lower && upper) constraints = Polyhedron::box(*lower, *upper);
        return std::shared_ptr<Problem>(
            new QpProblem(QpInstance(Q, lam, std::move(constraints))));
      },
      py::arg("Q"), py::arg("lam"), py::arg("lower") = std::nullopt,
      py::arg("upper") = std::nullopt,
      "decision map of min c'z + 0.5 z'(Q + lam I)z, optionally over a box");
  m.def(
      "knapsack_problem",
      [](const Eigen::VectorXd& weights, double capacity) {
        return std::shared_ptr<Problem>(
            new KnapsackProblem(KnapsackInstance(weights, capacity)));
      },
      py::arg("weights"), py::arg("capacity"));
  m.def(
      "grid_problem",
      [](int rows, int cols) {
        return std::shared_ptr<Problem>(new GridProblem(build_grid(rows, cols)));
      },
      py::arg("rows"), py::arg("cols"), "shortest-path flow on a rightward/downward grid");
  m.def("problem_from_json", [](const std::string& text) {
    return std::shared_ptr<Problem>(problem_from_json(text));
  });

  m.def(
      "solve_knapsack",
      [](const Eigen::VectorXd& weights, double capacity, const Eigen::VectorXd& values) {
        return solve_knapsack(KnapsackInstance(weights, capacity), values);
      },
      py::arg("weights"), py::arg("capacity"), py::arg("values"),
      "exact maximizer of values'z subject to the weight budget");

  // ----------------------------------------------------------- estimators
  m.def(
      "cov_regret",
      [](const Eigen::MatrixXd& costs, const Eigen::MatrixXd& decisions, bool unbiased) {
        return estimate_to_dict(cov_regret(make_pairs(costs, decisions, std::nullopt),
                                           unbiased ? Normalization::unbiased
                                                    : Normalization::population));
      },
      py::arg("costs"), py::arg("decisions"), py::arg("unbiased") = false,
      "one-pass cost-decision covariance over the archive");
  m.def(
      "empirical_regret",
      [](const Eigen::MatrixXd& costs, const Problem& problem,
         std::optional<Eigen::VectorXd> known_mean) {
        return estimate_to_dict(empirical_regret(costs, problem, known_mean));
      },
      py::arg("costs"), py::arg("problem"), py::arg("known_mean") = std::nullopt);
  m.def(
      "saa_regret",
      [](const Eigen::MatrixXd& costs, const Problem& problem, int scenario_count, Seed seed,
         bool with_replacement) {
        return estimate_to_dict(
            saa_regret(costs, problem, {scenario_count, seed, with_replacement}));
      },
      py::arg("costs"), py::arg("problem"), py::arg("scenario_count"), py::arg("seed") = 0,
      py::arg("with_replacement") = false);
  m.def(
      "qp_analytic_cov",
      [](const Eigen::MatrixXd& Q, double lam, const Eigen::MatrixXd& sigma) {
        return qp_analytic_cov(Q, lam, CovarianceMatrix(sigma));
      },
      py::arg("Q"), py::arg("lam"), py::arg("sigma"),
      "-trace((Q + lam I)^-1 sigma), zero optimization solves");
  m.def(
      "residual_estimator",
      [](const Eigen::MatrixXd& costs, const Eigen::MatrixXd& decisions, const Problem& problem) {
        return residual_estimator(make_pairs(costs, decisions, std::nullopt), problem);
      },
      py::arg("costs"), py::arg("decisions"), py::arg("problem"));
  m.def(
      "corrected_regret",
      [](const Eigen::MatrixXd& costs, const Eigen::MatrixXd& decisions, const Problem& problem) {
        return estimate_to_dict(corrected_regret(make_pairs(costs, decisions, std::nullopt), problem));
      },
      py::arg("costs"), py::arg("decisions"), py::arg("problem"));

  // --------------------------------------------------------------- bounds
  m.def(
      "lipschitz_residual_bound",
      [](double L, const Eigen::VectorXd& mean, const Eigen::MatrixXd& sigma) {
        return lipschitz_residual_bound(L, mean, CovarianceMatrix(sigma));
      },
      py::arg("L"), py::arg("mean"), py::arg("sigma"));
  m.def(
      "smooth_residual_bound",
      [](double M, const Eigen::VectorXd& mean, const Eigen::MatrixXd& sigma) {
        auto b = smooth_residual_bound(M, mean, CovarianceMatrix(sigma));
        return py::make_tuple(b.value, b.truncation_order);
      },
      py::arg("M"), py::arg("mean"), py::arg("sigma"));
  m.def(
      "strongly_convex_residual_bound",
      [](double L, double mu_sc, const Eigen::MatrixXd& sigma) {
        return strongly_convex_residual_bound(L, mu_sc, CovarianceMatrix(sigma));
      },
      py::arg("L"), py::arg("mu_sc"), py::arg("sigma"));
  m.def(
      "markowitz_residual_term",
      [](double lam, const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mean) {
        auto b = markowitz_residual_term(lam, CovarianceMatrix(sigma), mean);
        return py::make_tuple(b.value, b.truncation_order);
      },
      py::arg("lam"), py::arg("sigma"), py::arg("mean"));
  m.def("concentration_sample_size", &concentration_sample_size, py::arg("cost_bound"),
        py::arg("L"), py::arg("sigma_sq"), py::arg("epsilon"), py::arg("delta"));
  m.def("tail_probability", &tail_probability, py::arg("n"), py::arg("epsilon"),
        py::arg("cost_bound"), py::arg("L"), py::arg("sigma_sq"));
  m.def("normal_quantile", &normal_quantile, py::arg("p"));
  m.def(
      "clt_confidence_interval",
      [](const Eigen::MatrixXd& costs, const Eigen::MatrixXd& decisions, const Problem& problem,
         const std::string& grad, double level) {
        GradPi g = GradPi::zero();
        if (grad == "fd")
          g = GradPi::finite_difference();
        else if (grad != "zero")
          throw std::invalid_argument("grad must be 'zero' or 'fd'");
        auto ci = clt_confidence_interval(make_pairs(costs, decisions, std::nullopt), problem, g,
                                          level);
        py::dict d;
        d["center"] = ci.center;
        d["half_width"] = ci.half_width;
        d["level"] = ci.level;
        d["variance"] = ci.variance_estimate;
        d["form"] =
            ci.form == ConfidenceInterval::VarianceForm::delta_method ? "delta" : "simplified";
        return d;
      },
      py::arg("costs"), py::arg("decisions"), py::arg("problem"), py::arg("grad") = "zero",
      py::arg("level") = 0.95);

  // -------------------------------------------------------------- harness
  m.def(
      "run_experiment",
      [](const std::string& family, int n_vars, int n_constraints, long iterations, double lam,
         Seed seed, const std::string& mean_mode, double sigma_scale) {
        auto fam = family_from_name(family);
        if (!fam) throw std::invalid_argument("unknown family " + family);
        ExperimentConfig cfg;
        cfg.family = *fam;
        cfg.n_vars = n_vars;
        cfg.n_constraints = n_constraints;
        cfg.iterations = iterations;
        cfg.risk_aversion = lam;
        cfg.seed = seed;
        cfg.mean_mode = mean_mode == "estimated" ? MeanMode::estimated : MeanMode::known;
        cfg.sigma_scale = sigma_scale;
        return trace_to_dict(run_experiment(cfg));
      },
      py::arg("family"), py::arg("n_vars") = 10, py::arg("n_constraints") = 5,
      py::arg("iterations") = 5000, py::arg("lam") = 1.0, py::arg("seed") = 0,
      py::arg("mean_mode") = "known", py::arg("sigma_scale") = 1.0);

  // ------------------------------------------------------------------ spo
  py::class_<SpoDataset>(m, "SpoDataset")
      .def_readonly("contexts", &SpoDataset::contexts)
      .def_readonly("costs", &SpoDataset::costs)
      .def_readonly("hindsight", &SpoDataset::hindsight)
      .def_readonly("n_train", &SpoDataset::n_train)
      .def_readonly("n_val", &SpoDataset::n_val)
      .def_readonly("n_test", &SpoDataset::n_test)
      .def_property_readonly(
          "problem", [](const SpoDataset& d) { return std::static_pointer_cast<Problem>(d.problem); });
  m.def(
      "generate_spo_data",
      [](int context_dim, int grid_rows, int grid_cols, int n_train, int n_val, int n_test,
         double noise_sd, Seed seed) {
        return generate_spo_data(context_dim, grid_rows, grid_cols, {n_train, n_val, n_test},
                                 noise_sd, seed);
      },
      py::arg("context_dim") = 10, py::arg("grid_rows") = 4, py::arg("grid_cols") = 4,
      py::arg("n_train") = 200, py::arg("n_val") = 100, py::arg("n_test") = 100,
      py::arg("noise_sd") = 0.3, py::arg("seed") = 0);
  m.def(
      "spo_plus_loss",
      [](const Eigen::VectorXd& c_hat, const Eigen::VectorXd& c, const Eigen::VectorXd& z_star,
         const Problem& problem) {
        auto out = spo_plus_loss_and_subgradient(c_hat, c, z_star, problem);
        return py::make_tuple(out.loss, out.subgradient);
      },
      py::arg("c_hat"), py::arg("c"), py::arg("z_star"), py::arg("problem"));
  m.def(
      "train_spo",
      [](const SpoDataset& data, double lr, int batch, int epochs, int eval_every,
         const std::string& oracle, int scenario_count, Seed seed) {
        SpoTrainConfig cfg;
        cfg.learning_rate = lr;
        cfg.batch_size = batch;
        cfg.epochs = epochs;
        cfg.eval_every = eval_every;
        cfg.oracle = oracle == "saa" ? OracleKind::saa : OracleKind::cov;
        cfg.scenario_count = scenario_count;
        cfg.seed = seed;
        auto r = train_spo(data, cfg);
        py::dict d;
        d["best_epoch"] = r.best_epoch;
        d["best_val_regret"] = r.best_val_regret;
        d["test_abs_regret"] = r.test_abs_regret;
        d["train_seconds"] = r.train_seconds;
        d["val_overhead_seconds"] = r.val_overhead_seconds;
        d["epoch_train_loss"] = r.epoch_train_loss;
        d["log_csv"] = r.log_csv();
        return d;
      },
      py::arg("data"), py::arg("lr") = 5e-3, py::arg("batch") = 16, py::arg("epochs") = 20,
      py::arg("eval_every") = 2, py::arg("oracle") = "cov", py::arg("scenario_count") = 50,
      py::arg("seed") = 0);
  m.def(
      "bench_oracles",
      [](const SpoDataset& data, const std::vector<int>& scenario_counts, int repetitions,
         Seed seed) {
        py::list rows;
        for (const auto& r : bench_oracles(data, scenario_counts, repetitions, seed)) {
          py::dict d;
          d["oracle"] = r.oracle;
          if (r.scenario_count) d["scenario_count"] = *r.scenario_count;
          d["latency_ms_mean"] = r.mean_ms;
          d["latency_ms_std"] = r.std_ms;
          d["speedup"] = r.speedup;
          rows.append(std::move(d));
        }
        return rows;
      },
      py::arg("data"), py::arg("scenario_counts"), py::arg("repetitions") = 5,
      py::arg("seed") = 0);

  // ------------------------------------------------------------ portfolio
  m.def(
      "synthetic_returns",
      [](int n_stocks, int months, int factor_count, Seed seed) {
        ReturnsPanel p = synthetic_returns(n_stocks, months, factor_count, seed);
        py::dict d;
        d["months"] = p.months;
        d["tickers"] = p.tickers;
        d["returns"] = p.returns;
        return d;
      },
      py::arg("n_stocks"), py::arg("months"), py::arg("factor_count") = 0, py::arg("seed") = 0);
  m.def(
      "rolling_regret_experiment",
      [](const Eigen::MatrixXd& returns, int window_months, int portfolios_per_month,
         int stocks_per_portfolio, double lam, Seed seed) {
        ReturnsPanel panel;
        panel.returns = returns;
        for (Eigen::Index i = 0; i < returns.rows(); ++i)
          panel.months.push_back("m" + std::to_string(i));
        for (Eigen::Index i = 0; i < returns.cols(); ++i)
          panel.tickers.push_back("t" + std::to_string(i));
        RollingConfig cfg;
        cfg.window_months = window_months;
        cfg.portfolios_per_month = portfolios_per_month;
        cfg.stocks_per_portfolio = stocks_per_portfolio;
        cfg.risk_aversion = lam;
        cfg.seed = seed;
        RollingResult r = rolling_regret_experiment(panel, cfg);
        py::dict d;
        d["mean_forecast"] = r.mean_forecast;
        d["mean_realized"] = r.mean_realized;
        d["csv"] = r.to_csv();
        d["optimization_solves"] = r.optimization_solves;
        return d;
      },
      py::arg("returns"), py::arg("window_months") = 36, py::arg("portfolios_per_month") = 100,
      py::arg("stocks_per_portfolio") = 50, py::arg("lam") = 1.0, py::arg("seed") = 0);
}
