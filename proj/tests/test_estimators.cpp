#include <doctest.h>

#include <cmath>

#include "regretcov/estimators.hpp"
#include "regretcov/prob.hpp"

using namespace regretcov;

namespace {

SamplePairs toy_pairs(double z0, double z1) {
  Eigen::MatrixXd costs(2, 1), decisions(2, 1);
  costs << 1, 3;
  decisions << z0, z1;
  return SamplePairs(costs, decisions);
}

BoxProblem unit_box() { return BoxProblem(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)); }

}  // namespace

TEST_CASE("covariance estimate on two correlated and anti-correlated pairs") {
  CHECK(cov_regret(toy_pairs(2, 4)).value == doctest::Approx(1.0));
  CHECK(cov_regret(toy_pairs(4, 2)).value == doctest::Approx(-1.0));

  Eigen::MatrixXd one(1, 1);
  one << 5;
  CHECK(cov_regret(SamplePairs(one, one)).value == doctest::Approx(0.0));
}

TEST_CASE("unbiased normalization rescales by n/(n-1)") {
  CHECK(cov_regret(toy_pairs(2, 4), Normalization::unbiased).value == doctest::Approx(2.0));
}

TEST_CASE("known-mean centering uses the attached mean on the cost side") {
  Eigen::MatrixXd costs(2, 1), decisions(2, 1);
  costs << 1, 3;
  decisions << 2, 4;
  SamplePairs pairs(costs, decisions, Eigen::VectorXd::Zero(1));
  // (1/2)(1*2 + 3*4) - 0 * zbar = 7
  CHECK(cov_regret(pairs, Normalization::population, Centering::known_mean).value ==
        doctest::Approx(7.0));
}

TEST_CASE("covariance estimator touches each archive row exactly once") {
  Eigen::MatrixXd costs(5, 2), decisions(5, 2);
  Rng rng(7);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) {
      costs(i, j) = rng.normal();
      decisions(i, j) = rng.normal();
    }
  long visits = 0;
  const double streamed = cov_regret_stream(5, 2, [&](long i) {
    ++visits;
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(costs.row(i).transpose(),
                                                       decisions.row(i).transpose());
  });
  CHECK(visits == 5);
  CHECK(streamed ==
        doctest::Approx(cov_regret(SamplePairs(costs, decisions)).value).epsilon(1e-12));
}

TEST_CASE("empirical regret on the 1-D box matches hand evaluation") {
  BoxProblem box = unit_box();
  Eigen::MatrixXd samples(2, 1);
  samples << -1, 2;
  const auto est = empirical_regret(samples, box, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(est.value == doctest::Approx(-0.5));

  Eigen::MatrixXd low(2, 1);
  low << -2, -1;  // all decisions hit the upper bound, benchmark included
  CHECK(empirical_regret(low, box, Eigen::VectorXd::Constant(1, -1.5)).value ==
        doctest::Approx(0.0));
}

TEST_CASE("empirical regret is zero when every sample equals the mean") {
  BoxProblem box = unit_box();
  Eigen::MatrixXd samples = Eigen::MatrixXd::Constant(4, 1, 0.7);
  CHECK(empirical_regret(samples, box, Eigen::VectorXd::Constant(1, 0.7)).value ==
        doctest::Approx(0.0));
}

TEST_CASE("saa estimate over the full archive equals estimated-mean empirical regret") {
  BoxProblem box = unit_box();
  Eigen::MatrixXd samples(6, 1);
  samples << -1, 2, 0.2, 0.9, -0.3, 1.4;
  const auto empirical = empirical_regret(samples, box, std::nullopt);
  const auto saa = saa_regret(samples, box, {6, 123, false});
  CHECK(saa.value == doctest::Approx(empirical.value).epsilon(1e-12));
  CHECK(saa.solves == 7);  // scenario_count + 1
}

TEST_CASE("saa on the two-sample box case reproduces the hand value") {
  BoxProblem box = unit_box();
  Eigen::MatrixXd samples(2, 1);
  samples << -1, 2;
  CHECK(saa_regret(samples, box, {2, 5, false}).value == doctest::Approx(-0.5));
}

TEST_CASE("saa validates the scenario count against the archive") {
  BoxProblem box = unit_box();
  Eigen::MatrixXd samples(3, 1);
  samples << 1, 2, 3;
  CHECK_THROWS_AS(saa_regret(samples, box, {5, 1, false}), std::invalid_argument);
  CHECK_NOTHROW(saa_regret(samples, box, {5, 1, true}));
}

TEST_CASE("analytic covariance matches the trace arithmetic") {
  CHECK(qp_analytic_cov(Eigen::MatrixXd::Identity(2, 2), 1.0,
                        CovarianceMatrix(Eigen::MatrixXd::Identity(2, 2))) ==
        doctest::Approx(-1.0));

  Eigen::MatrixXd q = Eigen::Vector2d(1, 3).asDiagonal();
  Eigen::MatrixXd sigma = Eigen::Vector2d(2, 4).asDiagonal();
  CHECK(qp_analytic_cov(q, 1.0, CovarianceMatrix(sigma)) == doctest::Approx(-2.0));

  // Linear in the covariance scale.
  CHECK(qp_analytic_cov(q, 1.0, CovarianceMatrix(Eigen::MatrixXd(0.5 * sigma))) ==
        doctest::Approx(-1.0));

  CHECK_THROWS_AS(qp_analytic_cov(Eigen::MatrixXd::Zero(2, 2), 0.0,
                                  CovarianceMatrix(Eigen::MatrixXd::Identity(2, 2))),
                  Singular);
}

TEST_CASE("residual estimate vanishes for affine decision maps") {
  CovarianceMatrix q = random_pd_matrix(4, 17);
  QpProblem problem(QpInstance(q.matrix(), 1.0));
  CostDistribution dist(Eigen::VectorXd::Ones(4), random_pd_matrix(4, 18));
  const Eigen::MatrixXd costs = sample_costs(dist, 200, 19);
  SamplePairs pairs = SamplePairs::from_costs(costs, problem);
  CHECK(std::abs(residual_estimator(pairs, problem)) <= 1e-9);
}

TEST_CASE("residual estimate vanishes when all samples share a decision") {
  BoxProblem box = unit_box();
  Eigen::MatrixXd costs(3, 1);
  costs << 0.5, 0.8, 0.2;  // all positive, decision pinned at the lower bound
  SamplePairs pairs = SamplePairs::from_costs(costs, box);
  CHECK(residual_estimator(pairs, box) == doctest::Approx(0.0));
}

TEST_CASE("residual estimate matches its defining formula on a kinked 1-D map") {
  QpInstance inst(Eigen::MatrixXd::Identity(1, 1), 1.0,
                  Polyhedron::box(Eigen::VectorXd::Constant(1, -0.25),
                                  Eigen::VectorXd::Constant(1, 10.0)));
  QpProblem problem(inst);
  CostDistribution dist(Eigen::VectorXd::Constant(1, 0.5),
                        CovarianceMatrix(Eigen::MatrixXd::Identity(1, 1)));
  const Eigen::MatrixXd costs = sample_costs(dist, 500, 23);
  SamplePairs pairs = SamplePairs::from_costs(costs, problem);

  const double r_hat = residual_estimator(pairs, problem);
  const Eigen::VectorXd cbar = costs.colwise().mean().transpose();
  const double by_definition =
      cbar.dot(pairs.decisions.colwise().mean().transpose() - problem.solve(cbar).z);
  CHECK(r_hat == doctest::Approx(by_definition).epsilon(1e-12));
  CHECK(std::abs(r_hat) > 1e-4);  // boundary straddling makes it nonzero
}

TEST_CASE("finite-sample decomposition identities hold exactly") {
  QpInstance inst(Eigen::MatrixXd::Identity(2, 2), 1.0,
                  Polyhedron::box(Eigen::VectorXd::Constant(2, -0.3),
                                  Eigen::VectorXd::Constant(2, 0.3)));
  QpProblem problem(inst);
  Eigen::VectorXd mean(2);
  mean << 0.4, -0.2;
  CostDistribution dist(mean, random_pd_matrix(2, 41));
  const Eigen::MatrixXd costs = sample_costs(dist, 300, 42);
  SamplePairs pairs = SamplePairs::from_costs(costs, problem, mean);

  const double cov = cov_regret(pairs).value;
  const Eigen::VectorXd cbar = costs.colwise().mean().transpose();
  const Eigen::VectorXd zbar = pairs.decisions.colwise().mean().transpose();

  // Estimated-mean empirical regret = covariance + residual estimate.
  const double emp_est = empirical_regret(costs, problem, std::nullopt).value;
  CHECK(emp_est == doctest::Approx(cov + residual_estimator(pairs, problem)).epsilon(1e-10));

  // Known-mean empirical regret = covariance + cbar'(zbar - pi(mean)).
  const double emp_known = empirical_regret(costs, problem, mean).value;
  const double bookkeeping = cbar.dot(zbar - problem.solve(mean).z);
  CHECK(emp_known == doctest::Approx(cov + bookkeeping).epsilon(1e-10));
}

TEST_CASE("corrected estimate equals covariance for affine maps and helps on kinks") {
  SUBCASE("affine: correction is null") {
    QpProblem problem(QpInstance(Eigen::MatrixXd::Identity(3, 3), 1.0));
    CostDistribution dist(Eigen::VectorXd::Ones(3), random_pd_matrix(3, 51));
    SamplePairs pairs = SamplePairs::from_costs(sample_costs(dist, 100, 52), problem);
    CHECK(corrected_regret(pairs, problem).value ==
          doctest::Approx(cov_regret(pairs).value).epsilon(1e-9));
  }
  SUBCASE("kinked 1-D benchmark: corrected lands closer to empirical") {
    QpInstance inst(Eigen::MatrixXd::Identity(1, 1), 1.0,
                    Polyhedron::box(Eigen::VectorXd::Constant(1, -0.25),
                                    Eigen::VectorXd::Constant(1, 10.0)));
    QpProblem problem(inst);
    Eigen::VectorXd mean = Eigen::VectorXd::Constant(1, 0.5);
    CostDistribution dist(mean, CovarianceMatrix(Eigen::MatrixXd::Identity(1, 1)));
    const Eigen::MatrixXd costs = sample_costs(dist, 4000, 53);
    SamplePairs pairs = SamplePairs::from_costs(costs, problem, mean);

    const double emp = empirical_regret(costs, problem, mean).value;
    const double cov = cov_regret(pairs).value;
    const double corrected = corrected_regret(pairs, problem).value;
    CHECK(std::abs(corrected - emp) < std::abs(cov - emp));
  }
  SUBCASE("single sample is rejected") {
    BoxProblem box = unit_box();
    Eigen::MatrixXd one(1, 1);
    one << 0.5;
    SamplePairs pairs = SamplePairs::from_costs(one, box);
    CHECK_THROWS_AS(corrected_regret(pairs, box), InsufficientSamples);
  }
}

TEST_CASE("lp consistency: covariance and empirical regret converge together") {
  // Median over seeds of the relative gap shrinks along a geometric grid.
  const int n_seeds = 20;
  const int grid[3] = {500, 2000, 8000};
  std::vector<double> gaps[3];
  for (int s = 0; s < n_seeds; ++s) {
    LpProblem problem(random_lp(4, 3, 600 + static_cast<Seed>(s)));
    Rng mean_rng(700 + static_cast<Seed>(s));
    Eigen::VectorXd mean(4);
    for (int j = 0; j < 4; ++j) mean(j) = mean_rng.normal();
    CostDistribution dist(mean, random_pd_matrix(4, 800 + static_cast<Seed>(s)));
    const Eigen::MatrixXd all = sample_costs(dist, grid[2], 900 + static_cast<Seed>(s));
    for (int g = 0; g < 3; ++g) {
      const Eigen::MatrixXd costs = all.topRows(grid[g]);
      SamplePairs pairs = SamplePairs::from_costs(costs, problem, mean);
      const double cov = cov_regret(pairs).value;
      const double emp = empirical_regret(costs, problem, mean).value;
      gaps[g].push_back(std::abs(cov - emp) / std::max(std::abs(emp), 1e-12));
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double m0 = median(gaps[0]), m1 = median(gaps[1]), m2 = median(gaps[2]);
  CHECK(m1 < m0);
  CHECK(m2 < m1);
}

TEST_CASE("covariance of closed-form decisions stays near the analytic value") {
  const int d = 6, n = 5000;
  CovarianceMatrix sigma = random_pd_matrix(d, 1001);
  QpProblem problem(QpInstance(sigma.matrix(), 1.0));
  Eigen::VectorXd mean = Eigen::VectorXd::Ones(d);
  CostDistribution dist(mean, sigma);
  SamplePairs pairs = SamplePairs::from_costs(sample_costs(dist, n, 1002), problem);

  const double analytic = qp_analytic_cov(sigma.matrix(), 1.0, sigma);
  const double cov = cov_regret(pairs).value;
  // Crude sampling scale: |cov| / sqrt(n) times a wide safety factor.
  CHECK(std::abs(cov - analytic) <= 8.0 * std::abs(analytic) / std::sqrt(static_cast<double>(n)) + 0.05);
}

TEST_CASE("pairs archives round-trip through CSV") {
  Eigen::MatrixXd costs(2, 2), decisions(2, 2);
  costs << 1.25, -3.5, 0.125, 2.75;
  decisions << 1, 0, 0, 1;
  SamplePairs pairs(costs, decisions);
  SamplePairs loaded = SamplePairs::from_csv_string(pairs.to_csv());
  CHECK(loaded.costs == costs);
  CHECK(loaded.decisions == decisions);

  CHECK_THROWS_AS(SamplePairs::from_csv_string("a,b\n1,2\n"), SchemaError);
  CHECK_THROWS_AS(SamplePairs::from_csv_string("c_0,z_0\n"), SchemaError);
}

TEST_CASE("estimate serialization carries the method tag and extras") {
  auto est = cov_regret(toy_pairs(2, 4));
  const std::string json = est.to_json();
  CHECK(json.find("\"method\":\"cov\"") != std::string::npos);
  CHECK(json.find("\"n\":2") != std::string::npos);
}
