import math

import numpy as np
import pytest

import regretcov as rc


def test_cholesky_identity_and_rejection():
    eye = np.eye(3)
    assert np.allclose(rc.cholesky_factor(eye), eye)
    with pytest.raises(rc.NotPositiveDefiniteError):
        rc.cholesky_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_sampling_is_seed_deterministic():
    mean = np.zeros(3)
    cov = np.eye(3)
    a = rc.sample_costs(mean, cov, 50, seed=7)
    b = rc.sample_costs(mean, cov, 50, seed=7)
    assert np.array_equal(a, b)
    assert a.shape == (50, 3)


def test_lp_and_box_solutions():
    problem = rc.lp_problem(np.array([[1.0, 1.0]]), np.array([1.0]))
    d = problem.solve(np.array([-1.0, -2.0]))
    assert d.objective == pytest.approx(-2.0)
    assert d.z[1] == pytest.approx(1.0)


def test_cov_regret_toy_archive():
    costs = np.array([[1.0], [3.0]])
    decisions = np.array([[2.0], [4.0]])
    assert rc.cov_regret(costs, decisions)["value"] == pytest.approx(1.0)


def test_qp_analytic_cov_matches_trace_formula():
    assert rc.qp_analytic_cov(np.eye(2), 1.0, np.eye(2)) == pytest.approx(-1.0)


def test_unconstrained_qp_closed_form_and_residual():
    q = rc.random_pd_matrix(4, seed=3)
    problem = rc.qp_problem(q, 1.0)
    costs = rc.sample_costs(np.ones(4), rc.random_pd_matrix(4, seed=4), 300, seed=5)
    decisions = np.vstack([problem.solve(c).z for c in costs])
    assert abs(rc.residual_estimator(costs, decisions, problem)) < 1e-9
    est = rc.cov_regret(costs, decisions)
    corrected = rc.corrected_regret(costs, decisions, problem)
    assert corrected["value"] == pytest.approx(est["value"], abs=1e-9)


def test_grid_problem_shape():
    grid = rc.grid_problem(4, 4)
    assert grid.dim() == 24
    path = grid.solve(np.full(24, 0.5))
    assert path.objective == pytest.approx(3.0)


def test_knapsack_exact():
    d = rc.solve_knapsack(np.array([1.0, 2.0, 3.0]), 5.0, np.array([6.0, 10.0, 12.0]))
    assert d.objective == pytest.approx(22.0)


def test_bounds_and_quantile():
    assert rc.concentration_sample_size(1.0, 0.0, 1.0, 0.1, 0.05) == 738
    assert rc.normal_quantile(0.975) == pytest.approx(1.959963984540054)
    value, order = rc.markowitz_residual_term(1.0, np.eye(2), np.array([1.0, 0.0]))
    assert value == pytest.approx(-0.25)
    assert "Sigma" in order


def test_experiment_runner_roundtrip():
    trace = rc.run_experiment("lp", n_vars=4, n_constraints=3, iterations=50, seed=1)
    assert len(trace["running_cov"]) == 50
    assert trace["running_empirical"][-1] <= 1e-8


def test_spo_training_smoke():
    data = rc.generate_spo_data(n_train=32, n_val=16, n_test=16, seed=2)
    loss, subgrad = rc.spo_plus_loss(data.costs[0], data.costs[0], data.hindsight[0], data.problem)
    assert loss == pytest.approx(0.0)
    assert subgrad.shape == (24,)
    result = rc.train_spo(data, epochs=2, seed=3)
    assert math.isfinite(result["test_abs_regret"])
    assert len(result["epoch_train_loss"]) == 2


def test_portfolio_rolling_smoke():
    panel = rc.synthetic_returns(20, 30, 2, seed=4)
    out = rc.rolling_regret_experiment(
        panel["returns"], window_months=12, portfolios_per_month=4, stocks_per_portfolio=8, seed=5
    )
    assert out["mean_forecast"] < 0.0
    assert out["optimization_solves"] == 0
