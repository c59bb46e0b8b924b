"""Regret estimation via the cost-decision covariance.

The heavy lifting lives in the compiled extension; this package re-exports
its surface: seeded sampling, exact LP/QP/knapsack/grid solvers, the
one-pass covariance estimator and its corrected variants, residual bounds
with confidence intervals, and the replication experiment runners.
"""

from regretcov._core import (  # noqa: F401
    Decision,
    InfeasibleError,
    InsufficientSamplesError,
    NotPositiveDefiniteError,
    Problem,
    SpoDataset,
    UnboundedError,
    bench_oracles,
    cholesky_factor,
    clt_confidence_interval,
    concentration_sample_size,
    corrected_regret,
    cov_regret,
    empirical_regret,
    generate_spo_data,
    grid_problem,
    knapsack_problem,
    lipschitz_residual_bound,
    lp_problem,
    markowitz_residual_term,
    normal_quantile,
    problem_from_json,
    qp_analytic_cov,
    qp_problem,
    random_lp_problem,
    random_pd_matrix,
    residual_estimator,
    rolling_regret_experiment,
    run_experiment,
    saa_regret,
    sample_costs,
    smooth_residual_bound,
    solve_knapsack,
    spo_plus_loss,
    strongly_convex_residual_bound,
    synthetic_returns,
    tail_probability,
    train_spo,
)

__all__ = [name for name in dir() if not name.startswith("_")]
