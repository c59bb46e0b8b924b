#include "regretcov/portfolio.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "regretcov/csv.hpp"

namespace regretcov {

namespace {

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

ReturnsPanel panel_from_csv_string(const std::string& text, const FilterConfig& config,
                                   FilterReport* report) {
  csv::Table table = csv::read_string(text);
  const int date_col = table.column("date");
  const int ticker_col = table.column("ticker");
  const int ret_col = table.column("ret");
  if (date_col < 0 || ticker_col < 0 || ret_col < 0)
    throw SchemaError("returns CSV: header must contain date,ticker,ret");
  const int price_col = table.column("price");
  const int mktcap_col = table.column("mktcap");

  FilterReport local;
  local.rows_total = static_cast<long>(table.rows.size());

  // (ticker, month) -> return, applying the row filters.
  std::map<std::string, std::map<std::string, double>> by_ticker;
  std::set<std::string> month_set;
  for (const auto& row : table.rows) {
    const std::string& month = row[static_cast<std::size_t>(date_col)];
    const std::string& ticker = row[static_cast<std::size_t>(ticker_col)];
    double ret = 0.0;
    if (!parse_double(row[static_cast<std::size_t>(ret_col)], ret)) {
      ++local.dropped_missing;
      continue;
    }
    if (ret < config.return_floor) {
      ++local.dropped_return_floor;
      continue;
    }
    if (ret > config.return_cap) {
      ++local.dropped_return_cap;
      continue;
    }
    if (price_col >= 0) {
      double price = 0.0;
      if (!parse_double(row[static_cast<std::size_t>(price_col)], price) || price <= 0.0) {
        ++local.dropped_price;
        continue;
      }
    }
    if (mktcap_col >= 0) {
      double cap = 0.0;
      if (!parse_double(row[static_cast<std::size_t>(mktcap_col)], cap) ||
          cap < config.min_market_cap) {
        ++local.dropped_market_cap;
        continue;
      }
    }
    by_ticker[ticker][month] = ret;
    month_set.insert(month);
    ++local.rows_kept;
  }

  std::vector<std::string> all_months(month_set.begin(), month_set.end());
  std::map<std::string, int> month_index;
  for (std::size_t i = 0; i < all_months.size(); ++i)
    month_index[all_months[i]] = static_cast<int>(i);

  // Longest consecutive coverage per ticker against the global month grid.
  std::vector<std::string> kept_tickers;
  for (const auto& [ticker, obs] : by_ticker) {
    int best_run = 0, run = 0, prev = -2;
    for (const auto& [month, ret] : obs) {
      (void)ret;
      const int idx = month_index[month];
      run = idx == prev + 1 ? run + 1 : 1;
      best_run = std::max(best_run, run);
      prev = idx;
    }
    if (best_run >= config.history_min)
      kept_tickers.push_back(ticker);
    else
      ++local.tickers_dropped_history;
  }
  if (kept_tickers.empty()) throw EmptyUniverse("returns CSV: no ticker meets the filters");

  // Months covered by every retained ticker; the panel must be complete.
  std::vector<std::string> kept_months;
  for (const auto& month : all_months) {
    bool everywhere = true;
    for (const auto& ticker : kept_tickers) {
      if (!by_ticker[ticker].count(month)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere)
      kept_months.push_back(month);
    else
      ++local.months_dropped_incomplete;
  }
  if (kept_months.empty()) throw EmptyUniverse("returns CSV: no common month across tickers");

  ReturnsPanel panel;
  panel.months = kept_months;
  panel.tickers = kept_tickers;
  panel.returns.resize(static_cast<Eigen::Index>(kept_months.size()),
                       static_cast<Eigen::Index>(kept_tickers.size()));
  for (std::size_t t = 0; t < kept_tickers.size(); ++t)
    for (std::size_t m = 0; m < kept_months.size(); ++m)
      panel.returns(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(t)) =
          by_ticker[kept_tickers[t]][kept_months[m]];

  if (report) *report = local;
  return panel;
}

ReturnsPanel load_and_filter(const std::string& csv_path, const FilterConfig& config,
                             FilterReport* report) {
  std::ifstream in(csv_path);
  if (!in) throw SchemaError("returns CSV: cannot open " + csv_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return panel_from_csv_string(buf.str(), config, report);
}

ReturnsPanel synthetic_returns(int n_stocks, int months, int factor_count, Seed seed) {
  if (n_stocks < 1 || months < 1)
    throw std::invalid_argument("synthetic_returns: dimensions must be >= 1");
  if (factor_count < 0) throw std::invalid_argument("synthetic_returns: factor_count >= 0");

  Rng rng(seed);
  Eigen::VectorXd stock_mean(n_stocks);
  for (int i = 0; i < n_stocks; ++i) stock_mean(i) = 0.008 + 0.004 * rng.normal();
  Eigen::MatrixXd loadings(n_stocks, factor_count);
  for (int i = 0; i < n_stocks; ++i)
    for (int k = 0; k < factor_count; ++k) loadings(i, k) = rng.uniform(0.25, 1.0);

  ReturnsPanel panel;
  panel.returns.resize(months, n_stocks);
  for (int m = 0; m < months; ++m) {
    Eigen::VectorXd factors(factor_count);
    for (int k = 0; k < factor_count; ++k) factors(k) = 0.04 * rng.normal();
    for (int i = 0; i < n_stocks; ++i) {
      double r = stock_mean(i) + 0.08 * rng.normal();
      if (factor_count > 0) r += loadings.row(i).dot(factors);
      panel.returns(m, i) = r;
    }
  }

  panel.months.reserve(static_cast<std::size_t>(months));
  for (int m = 0; m < months; ++m) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", 2015 + m / 12, m % 12 + 1);
    panel.months.emplace_back(buf);
  }
  panel.tickers.reserve(static_cast<std::size_t>(n_stocks));
  for (int i = 0; i < n_stocks; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%04d", i);
    panel.tickers.emplace_back(buf);
  }
  return panel;
}

std::string panel_to_csv(const ReturnsPanel& panel) {
  std::ostringstream out;
  out << "date,ticker,ret\n";
  for (int m = 0; m < panel.num_months(); ++m)
    for (int t = 0; t < panel.num_tickers(); ++t)
      out << panel.months[static_cast<std::size_t>(m)] << ','
          << panel.tickers[static_cast<std::size_t>(t)] << ','
          << csv::format_double(panel.returns(m, t)) << '\n';
  return out.str();
}

ShrunkCovariance shrunk_covariance(const Eigen::MatrixXd& window_returns) {
  const auto w = window_returns.rows();
  const auto d = window_returns.cols();
  if (w < 2) throw std::invalid_argument("shrunk_covariance: need at least 2 rows");

  const Eigen::RowVectorXd mean = window_returns.colwise().mean();
  const Eigen::MatrixXd centered = window_returns.rowwise() - mean;
  const Eigen::MatrixXd sample = centered.transpose() * centered / static_cast<double>(w);

  ShrunkCovariance out;
  out.target_scale = sample.trace() / static_cast<double>(d);
  const double dispersion =
      (sample - out.target_scale * Eigen::MatrixXd::Identity(d, d)).squaredNorm();
  if (dispersion <= 0.0) {
    out.sigma = sample;  // already a multiple of the identity
    out.intensity = 0.0;
    return out;
  }
  double beta_bar = 0.0;
  const double sample_norm = sample.squaredNorm();
  for (Eigen::Index k = 0; k < w; ++k) {
    const Eigen::VectorXd row = centered.row(k).transpose();
    const double quad = row.dot(sample * row);
    beta_bar += row.squaredNorm() * row.squaredNorm() - 2.0 * quad + sample_norm;
  }
  beta_bar /= static_cast<double>(w) * static_cast<double>(w);
  out.intensity = std::min(1.0, beta_bar / dispersion);
  out.sigma = (1.0 - out.intensity) * sample +
              out.intensity * out.target_scale * Eigen::MatrixXd::Identity(d, d);
  return out;
}

RollingResult rolling_regret_experiment(const ReturnsPanel& panel, const RollingConfig& cfg) {
  const int n_months = panel.num_months();
  const int n_stocks = panel.num_tickers();
  if (cfg.window_months < 12) throw std::invalid_argument("rolling: window must be >= 12");
  if (n_months <= cfg.window_months + 1)
    throw std::invalid_argument("rolling: panel needs more months than window + 1");
  if (n_stocks < cfg.stocks_per_portfolio)
    throw std::invalid_argument("rolling: universe smaller than a portfolio");

  RollingResult result;
  for (int t = cfg.window_months - 1; t + 1 < n_months; ++t) {
    const Eigen::MatrixXd window =
        panel.returns.middleRows(t - cfg.window_months + 1, cfg.window_months);
    const ShrunkCovariance shrunk = shrunk_covariance(window);
    const Eigen::VectorXd mean_returns = window.colwise().mean().transpose();

    double forecast_sum = 0.0, realized_sum = 0.0;
    for (int p = 0; p < cfg.portfolios_per_month; ++p) {
      Rng rng = Rng::for_task(cfg.seed, static_cast<Seed>(t) * 100003u + static_cast<Seed>(p) + 1);
      std::set<int> members;  // with replacement, duplicates collapsed
      for (int s = 0; s < cfg.stocks_per_portfolio; ++s)
        members.insert(static_cast<int>(rng.index(static_cast<std::size_t>(n_stocks))));
      const std::vector<int> idx(members.begin(), members.end());
      const int k = static_cast<int>(idx.size());

      Eigen::MatrixXd sigma(k, k);
      Eigen::VectorXd mu(k), next(k);
      for (int a = 0; a < k; ++a) {
        mu(a) = mean_returns(idx[static_cast<std::size_t>(a)]);
        next(a) = panel.returns(t + 1, idx[static_cast<std::size_t>(a)]);
        for (int b = 0; b < k; ++b)
          sigma(a, b) = shrunk.sigma(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
      }

      const Eigen::MatrixXd reg =
          sigma + cfg.risk_aversion * Eigen::MatrixXd::Identity(k, k);
      Eigen::LLT<Eigen::MatrixXd> llt(reg);
      if (llt.info() != Eigen::Success)
        throw Singular("rolling: shrunk window covariance still singular");

      // Costs are negated returns; all decisions come from the closed form,
      // so the forecast needs no optimization solves.
      const Eigen::VectorXd cost_mean = -mu;
      const Eigen::VectorXd decision = -llt.solve(cost_mean);
      forecast_sum += -llt.solve(sigma).trace();

      const Eigen::VectorXd realized_cost = -next;
      const Eigen::VectorXd hindsight = -llt.solve(realized_cost);
      realized_sum += realized_cost.dot(hindsight) - realized_cost.dot(decision);
    }

    MonthResult month;
    month.month = panel.months[static_cast<std::size_t>(t)];
    month.forecast_regret_mean = forecast_sum / cfg.portfolios_per_month;
    month.realized_regret_mean = realized_sum / cfg.portfolios_per_month;
    month.gap = month.forecast_regret_mean - month.realized_regret_mean;
    result.months.push_back(std::move(month));
  }

  for (const auto& m : result.months) {
    result.mean_forecast += m.forecast_regret_mean;
    result.mean_realized += m.realized_regret_mean;
  }
  result.mean_forecast /= static_cast<double>(result.months.size());
  result.mean_realized /= static_cast<double>(result.months.size());
  return result;
}

std::string RollingResult::to_csv() const {
  std::ostringstream out;
  out << "month,forecast_regret_mean,realized_regret_mean,gap\n";
  for (const auto& m : months)
    out << m.month << ',' << csv::format_double(m.forecast_regret_mean) << ','
        << csv::format_double(m.realized_regret_mean) << ',' << csv::format_double(m.gap)
        << '\n';
  return out.str();
}

std::string RollingResult::summary_json(const RollingConfig& cfg) const {
  nlohmann::json j;
  j["months"] = months.size();
  j["window_months"] = cfg.window_months;
  j["portfolios_per_month"] = cfg.portfolios_per_month;
  j["stocks_per_portfolio"] = cfg.stocks_per_portfolio;
  j["lambda"] = cfg.risk_aversion;
  j["seed"] = cfg.seed;
  j["mean_forecast"] = mean_forecast;
  j["mean_realized"] = mean_realized;
  j["optimization_solves"] = optimization_solves;
  return j.dump();
}

}  // namespace regretcov
