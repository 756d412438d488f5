#include "qsw/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qsw/error.hpp"

namespace qsw {

namespace {

Eigen::VectorXd checked_weights(const Eigen::VectorXd& w, std::size_t n) {
  if (static_cast<std::size_t>(w.size()) != n) throw NumericError("strategy returned the wrong number of weights");
  if (!w.allFinite() || w.minCoeff() < -1e-9) throw NumericError("strategy returned invalid weights");
  Eigen::VectorXd out = w.cwiseMax(0.0);
  const double total = out.sum();
  if (!(total > 0.0) || std::abs(total - 1.0) > 1e-6) throw NumericError("strategy weights do not sum to 1");
  return out / total;
}

}  // namespace

void BacktestConfig::validate() const {
  if (train_days < 2) throw ParameterError("train_days must be at least 2");
  if (start && end && !(*start < *end)) throw ParameterError("start must precede end");
  if (!(cost_bp_per_100_turnover >= 0.0)) throw ParameterError("cost must be non-negative");
}

std::vector<std::size_t> rebalance_rows(const ReturnsPanel& panel, const BacktestConfig& config) {
  config.validate();
  std::vector<std::size_t> rows;
  for (std::size_t r = std::max<std::size_t>(config.train_days, 1); r < panel.rows(); ++r) {
    const Date& d = panel.dates[r];
    if (config.start && d < *config.start) continue;
    if (config.end && *config.end < d) break;
    if (d.month() == panel.dates[r - 1].month()) continue;
    const bool quarter_start = (d.month() - 1) % 3 == 0;
    if (config.rebalance == RebalanceRule::monthly || quarter_start) rows.push_back(r);
  }
  return rows;
}

BacktestResult run_backtest(const ReturnsPanel& panel, const Strategy& strategy,
                            const BacktestConfig& config) {
  const auto schedule = rebalance_rows(panel, config);
  const RowRange rows = accounted_rows(panel, config);
  const std::size_t last = rows.end - 1;

  const Eigen::MatrixXd simple = panel.simple_returns();
  const std::size_t n = panel.assets();
  const std::size_t first = schedule.front();
  const auto days = static_cast<Eigen::Index>(last - first + 1);

  BacktestResult result;
  result.config = config;
  result.dates.reserve(static_cast<std::size_t>(days) + 1);
  result.dates.push_back(panel.dates[first - 1]);
  result.equity.resize(days + 1);
  result.daily_returns.resize(days);
  result.equity(0) = 1.0;

  Eigen::VectorXd holdings = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double value = 1.0;
  std::size_t next = 0;
  for (std::size_t t = first; t <= last; ++t) {
    if (next < schedule.size() && schedule[next] == t) {
      const StrategyOutput out = strategy(panel.slice_rows(t - config.train_days, t));
      Rebalance reb;
      reb.date = panel.dates[t];
      reb.target = checked_weights(out.weights, n);
      if (next > 0) reb.drifted = holdings / value;
      reb.converged = out.converged;
      reb.iterations = out.iterations;
      holdings = value * reb.target;
      result.rebalances.push_back(std::move(reb));
      ++next;
    }
    const Eigen::VectorXd r = simple.row(static_cast<Eigen::Index>(t)).transpose();
    const double rp = (holdings / value).dot(r);
    holdings = holdings.cwiseProduct((r.array() + 1.0).matrix());
    value = holdings.sum();
    if (!(value > 0.0) || !std::isfinite(value)) throw NumericError("portfolio value is no longer positive");
    const auto k = static_cast<Eigen::Index>(t - first);
    result.daily_returns(k) = rp;
    result.equity(k + 1) = value;
    result.dates.push_back(panel.dates[t]);
  }
  return result;
}

SharpeRatio annualized_sharpe(std::span<const double> daily_returns) {
  const auto m = daily_returns.size();
  if (m < 2) return {0.0, true};
  const auto [lo, hi] = std::minmax_element(daily_returns.begin(), daily_returns.end());
  if (*lo == *hi) return {0.0, true};
  const double mean = std::accumulate(daily_returns.begin(), daily_returns.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double r : daily_returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  if (!(sd > 0.0)) return {0.0, true};
  return {(mean * kTradingDaysPerYear) / (sd * std::sqrt(static_cast<double>(kTradingDaysPerYear))), false};
}

double annualized_volatility(std::span<const double> daily_returns) {
  const auto m = daily_returns.size();
  if (m < 2) return 0.0;
  const double mean = std::accumulate(daily_returns.begin(), daily_returns.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double r : daily_returns) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(m - 1)) * std::sqrt(static_cast<double>(kTradingDaysPerYear));
}

double max_drawdown(std::span<const double> equity) {
  double peak = 0.0;
  double worst = 0.0;
  for (double v : equity) {
    peak = std::max(peak, v);
    if (peak > 0.0) worst = std::max(worst, (peak - v) / peak);
  }
  return worst;
}

Concentration concentration(const Eigen::VectorXd& weights) {
  Concentration c;
  c.hhi = weights.squaredNorm();
  c.n_eff = c.hhi > 0.0 ? 1.0 / c.hhi : 0.0;
  std::vector<double> sorted(weights.data(), weights.data() + weights.size());
  const auto top = std::min<std::size_t>(5, sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top), sorted.end(),
                    std::greater<>());
  c.c5 = std::accumulate(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(top), 0.0);
  return c;
}

double annualized_turnover(std::span<const Rebalance> history, TurnoverConvention convention,
                           int periods_per_year) {
  if (history.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t q = 1; q < history.size(); ++q) {
    const Eigen::VectorXd& before = convention == TurnoverConvention::drift_aware && history[q].drifted.size() > 0
                                        ? history[q].drifted
                                        : history[q - 1].target;
    total += (history[q].target - before).cwiseAbs().sum();
  }
  return periods_per_year * total / static_cast<double>(history.size() - 1);
}

double efficiency(double sharpe, double turnover_ann) { return sharpe / (turnover_ann + 0.01); }

double cost_drag(double turnover_ann, double bp_per_100) { return turnover_ann * bp_per_100; }

MetricsReport summarize(const BacktestResult& result) {
  MetricsReport m;
  const std::span<const double> daily(result.daily_returns.data(),
                                      static_cast<std::size_t>(result.daily_returns.size()));
  const std::span<const double> equity(result.equity.data(), static_cast<std::size_t>(result.equity.size()));
  m.sharpe_ann = annualized_sharpe(daily).value;
  m.vol_ann = annualized_volatility(daily);
  m.final_value = result.equity(result.equity.size() - 1);
  if (!daily.empty()) {
    m.cagr = std::pow(m.final_value / result.equity(0),
                      static_cast<double>(kTradingDaysPerYear) / static_cast<double>(daily.size())) - 1.0;
  }
  m.mdd = max_drawdown(equity);

  double hhi = 0.0, c5 = 0.0;
  for (const auto& reb : result.rebalances) {
    const auto c = concentration(reb.target);
    hhi += c.hhi;
    c5 += c.c5;
    m.converged = m.converged && reb.converged;
    m.iterations = std::max(m.iterations, reb.iterations);
  }
  if (!result.rebalances.empty()) {
    m.hhi_mean = hhi / static_cast<double>(result.rebalances.size());
    m.c5_mean = c5 / static_cast<double>(result.rebalances.size());
    m.n_eff_mean = 1.0 / m.hhi_mean;
  }
  m.turnover_ann = annualized_turnover(result.rebalances, result.config.turnover_convention,
                                       result.config.periods_per_year());
  m.efficiency = efficiency(m.sharpe_ann, m.turnover_ann);
  m.cost_drag_bp = cost_drag(m.turnover_ann, result.config.cost_bp_per_100_turnover);
  return m;
}

RowRange accounted_rows(const ReturnsPanel& panel, const BacktestConfig& config) {
  const auto schedule = rebalance_rows(panel, config);
  if (schedule.empty()) {
    throw DataError("insufficient history: no rebalance date has " + std::to_string(config.train_days) +
                    " prior return rows inside the backtest range");
  }
  std::size_t last = panel.rows() - 1;
  if (config.end) {
    while (last > schedule.front() && *config.end < panel.dates[last]) --last;
  }
  return RowRange{schedule.front(), last + 1};
}

BacktestResult index_proxy_backtest(const ReturnsPanel& panel, const BacktestConfig& config) {
  const RowRange rows = accounted_rows(panel, config);
  const IndexProxy proxy = index_proxy(panel, rows);
  BacktestResult out;
  out.config = config;
  out.dates.push_back(panel.dates[rows.begin - 1]);
  out.dates.insert(out.dates.end(), proxy.dates.begin(), proxy.dates.end());
  out.equity = proxy.equity;
  out.daily_returns = proxy.daily_returns;
  Rebalance initial;
  initial.date = proxy.dates.front();
  initial.target = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(panel.assets()),
                                             1.0 / static_cast<double>(panel.assets()));
  out.rebalances.push_back(std::move(initial));
  return out;
}

MetricsReport summarize_index_proxy(const BacktestResult& proxy) {
  MetricsReport m = summarize(proxy);
  m.turnover_ann = IndexProxy::kAssumedTurnover;
  m.efficiency = efficiency(m.sharpe_ann, m.turnover_ann);
  m.cost_drag_bp = cost_drag(m.turnover_ann, proxy.config.cost_bp_per_100_turnover);
  return m;
}

}  // namespace qsw
