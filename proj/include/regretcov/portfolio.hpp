#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "regretcov/estimators.hpp"
#include "regretcov/prob.hpp"

namespace regretcov {

class EmptyUniverse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Complete month-by-ticker matrix of decimal monthly returns.
struct ReturnsPanel {
  std::vector<std::string> months;   // sorted ascending
  std::vector<std::string> tickers;  // column order
  Eigen::MatrixXd returns;           // months x tickers

  int num_months() const { return static_cast<int>(months.size()); }
  int num_tickers() const { return static_cast<int>(tickers.size()); }
};

struct FilterConfig {
  double return_floor = -1.0;    // drop rows with ret < floor
  double return_cap = 10.0;      // drop rows with ret > cap
  double min_market_cap = 5e6;   // drop rows below (when the column exists)
  int history_min = 60;          // longest consecutive run required
};

struct FilterReport {
  long rows_total = 0;
  long dropped_missing = 0;
  long dropped_return_floor = 0;
  long dropped_return_cap = 0;
  long dropped_price = 0;
  long dropped_market_cap = 0;
  long tickers_dropped_history = 0;
  long months_dropped_incomplete = 0;
  long rows_kept = 0;
};

/**
 * Ingest a CSV with header date,ticker,ret[,price,mktcap]. Rows with a
 * missing return, a return below the floor or above the cap, a nonpositive
 * price, or a market cap below the minimum are dropped and counted per
 * rule. Tickers whose longest consecutive coverage is shorter than
 * history_min are dropped; the panel is then restricted to the months every
 * retained ticker covers, so it has no missing values.
 */
ReturnsPanel load_and_filter(const std::string& csv_path, const FilterConfig& config,
                             FilterReport* report = nullptr);

ReturnsPanel panel_from_csv_string(const std::string& text, const FilterConfig& config,
                                   FilterReport* report = nullptr);

/**
 * Factor-model generator standing in for licensed data:
 *   r_it = mu_i + sum_k B_ik f_kt + e_it
 * with mu_i ~ N(0.008, 0.004^2), B_ik uniform on [0.25, 1.0] (absent when
 * factor_count = 0), f_kt ~ N(0, 0.04^2), e_it ~ N(0, 0.08^2).
 */
ReturnsPanel synthetic_returns(int n_stocks, int months, int factor_count, Seed seed);

std::string panel_to_csv(const ReturnsPanel& panel);

struct ShrunkCovariance {
  Eigen::MatrixXd sigma;
  double intensity = 0.0;     // shrinkage weight on the identity target
  double target_scale = 0.0;  // trace(S)/d; floor on the minimum eigenvalue
                              // is intensity * target_scale
};

/// Linear shrinkage of the sample covariance toward a scaled identity with
/// a data-driven intensity; keeps short-window estimates well-posed.
ShrunkCovariance shrunk_covariance(const Eigen::MatrixXd& window_returns);

struct RollingConfig {
  int window_months = 36;
  int portfolios_per_month = 100;
  int stocks_per_portfolio = 50;
  double risk_aversion = 1.0;
  Seed seed = 0;
};

struct MonthResult {
  std::string month;  // decision month
  double forecast_regret_mean = 0.0;
  double realized_regret_mean = 0.0;
  double gap = 0.0;  // forecast - realized
};

struct RollingResult {
  std::vector<MonthResult> months;
  double mean_forecast = 0.0;
  double mean_realized = 0.0;
  /// Optimization-solver invocations on the forecast path; the closed-form
  /// route performs none.
  long optimization_solves = 0;

  std::string to_csv() const;
  std::string summary_json(const RollingConfig& cfg) const;
};

/**
 * Each month: estimate mean and covariance from the trailing window, form
 * random portfolios (sampled with replacement, duplicates collapsed), take
 * the closed-form mean-variance decision with costs = negated returns,
 * forecast regret from the trace formula, and evaluate realized regret
 * against the hindsight optimum at the next month's returns.
 */
RollingResult rolling_regret_experiment(const ReturnsPanel& panel, const RollingConfig& cfg);

}  // namespace regretcov
