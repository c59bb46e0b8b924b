#include <doctest.h>

#include "oracles.hpp"
#include "regretcov/prob.hpp"
#include "regretcov/simplex.hpp"

using namespace regretcov;

TEST_CASE("two-variable examples solve to the expected vertices") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd b(1);
  b << 1;

  SUBCASE("nonnegative costs pin the origin") {
    Eigen::VectorXd c(2);
    c << 1, 1;
    auto r = simplex_solve(A, b, c);
    CHECK(r.objective == doctest::Approx(0.0));
    CHECK(r.x.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("steeper negative cost picks the matching vertex") {
    Eigen::VectorXd c(2);
    c << -1, -2;
    auto r = simplex_solve(A, b, c);
    CHECK(r.objective == doctest::Approx(-2.0));
    CHECK(r.x(0) == doctest::Approx(0.0));
    CHECK(r.x(1) == doctest::Approx(1.0));
  }
  SUBCASE("tied costs resolve deterministically and are flagged") {
    Eigen::VectorXd c(2);
    c << -1, -1;
    auto r1 = simplex_solve(A, b, c);
    auto r2 = simplex_solve(A, b, c);
    CHECK(r1.objective == doctest::Approx(-1.0));
    CHECK(r1.x == r2.x);
    CHECK(r1.alternate_optima);
  }
}

TEST_CASE("infeasible and unbounded problems raise the matching errors") {
  Eigen::MatrixXd A(2, 1);
  A << 1, -1;
  Eigen::VectorXd b(2);
  b << 1, -2;  // x <= 1 and x >= 2
  Eigen::VectorXd c(1);
  c << 1;
  CHECK_THROWS_AS(simplex_solve(A, b, c), Infeasible);

  Eigen::MatrixXd A2(1, 1);
  A2 << -1;  // x >= -1, free to grow
  Eigen::VectorXd b2(1);
  b2 << 1;
  Eigen::VectorXd c2(1);
  c2 << -1;
  CHECK_THROWS_AS(simplex_solve(A2, b2, c2), Unbounded);
}

TEST_CASE("equality rows and redundant constraints are handled") {
  // x + y = 1 stated twice, minimize -x.
  Eigen::MatrixXd A(2, 2);
  A << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 1;
  std::vector<RowSense> senses{RowSense::eq, RowSense::eq};
  Eigen::VectorXd c(2);
  c << -1, 0;
  auto r = simplex_solve(A, b, senses, c);
  CHECK(r.x(0) == doctest::Approx(1.0));
  CHECK(r.x(1) == doctest::Approx(0.0));
}

TEST_CASE("simplex agrees with exhaustive vertex enumeration on random instances") {
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(4000 + static_cast<Seed>(trial));
    const int n = 2 + static_cast<int>(rng.index(5));  // up to 6 variables
    const int m = 2 + static_cast<int>(rng.index(5));  // up to 6 constraints
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
      b(i) = std::abs(rng.normal()) + 1.0;
    }
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = rng.normal();

    auto vertices = test_oracles::enumerate_vertices(A, b, true);
    REQUIRE(!vertices.empty());

    SimplexResult r;
    try {
      r = simplex_solve(A, b, c);
    } catch (const Unbounded&) {
      continue;  // oracle only covers bounded instances
    }
    const double oracle = test_oracles::min_over_vertices(vertices, c);
    CHECK(r.objective == doctest::Approx(oracle).epsilon(1e-8));
    ++checked;
  }
  CHECK(checked > 100);
}
