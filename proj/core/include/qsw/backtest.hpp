#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qsw/classical.hpp"
#include "qsw/date.hpp"
#include "qsw/market_data.hpp"

namespace qsw {

enum class RebalanceRule { quarterly, monthly };

enum class TurnoverConvention {
  paper_literal,  // consecutive target weights
  drift_aware,    // previous holdings drifted up to the rebalance date
};

inline constexpr int kTradingDaysPerYear = 252;

struct BacktestConfig {
  std::size_t train_days = 252;
  RebalanceRule rebalance = RebalanceRule::quarterly;
  std::optional<Date> start;  // first rebalance on or after this date
  std::optional<Date> end;    // last accounted day on or before this date
  double cost_bp_per_100_turnover = 20.0;
  TurnoverConvention turnover_convention = TurnoverConvention::paper_literal;

  void validate() const;
  int periods_per_year() const { return rebalance == RebalanceRule::quarterly ? 4 : 12; }
};

/// What a strategy returns for one rebalance.
struct StrategyOutput {
  Eigen::VectorXd weights;
  bool converged = true;
  int iterations = 0;
};

/// Receives the training returns (rows strictly before the rebalance date only).
using Strategy = std::function<StrategyOutput(const ReturnsPanel& training)>;

struct Rebalance {
  Date date;
  Eigen::VectorXd target;
  Eigen::VectorXd drifted;  // weights just before trading; empty at the first rebalance
  bool converged = true;
  int iterations = 0;
};

struct BacktestResult {
  std::vector<Date> dates;      // dates[0] is the close before the first accounted return
  Eigen::VectorXd equity;       // equity(0) = 1
  Eigen::VectorXd daily_returns;
  std::vector<Rebalance> rebalances;
  BacktestConfig config;
};

struct SharpeRatio {
  double value = 0.0;
  bool degenerate = false;  // fewer than 2 points or zero dispersion; value forced to 0
};

struct Concentration {
  double hhi = 0.0;
  double n_eff = 0.0;
  double c5 = 0.0;
};

struct MetricsReport {
  double sharpe_ann = 0.0;
  double vol_ann = 0.0;
  double cagr = 0.0;
  double mdd = 0.0;
  double hhi_mean = 0.0;
  double n_eff_mean = 0.0;
  double c5_mean = 0.0;
  double turnover_ann = 0.0;
  double efficiency = 0.0;
  double cost_drag_bp = 0.0;
  double final_value = 1.0;
  bool converged = true;
  int iterations = 0;  // max over rebalances
};

/// Row indices of the returns panel where the portfolio is rebalanced.
std::vector<std::size_t> rebalance_rows(const ReturnsPanel& panel, const BacktestConfig& config);

/// Rolls `strategy` through the panel. Holdings drift with simple returns between rebalances.
BacktestResult run_backtest(const ReturnsPanel& panel, const Strategy& strategy,
                            const BacktestConfig& config);

SharpeRatio annualized_sharpe(std::span<const double> daily_returns);
double annualized_volatility(std::span<const double> daily_returns);
double max_drawdown(std::span<const double> equity);
Concentration concentration(const Eigen::VectorXd& weights);
/// periods_per_year * mean over consecutive rebalances of sum_i |w_q - w_{q-1}|; 0 with fewer than 2.
double annualized_turnover(std::span<const Rebalance> history, TurnoverConvention convention,
                           int periods_per_year = 4);
double efficiency(double sharpe, double turnover_ann);
double cost_drag(double turnover_ann, double bp_per_100);

MetricsReport summarize(const BacktestResult& result);

/// Returns rows accounted by a backtest under `config`: [first rebalance, last day].
RowRange accounted_rows(const ReturnsPanel& panel, const BacktestConfig& config);

/// Equal-weight buy-and-hold over exactly the days run_backtest would account under `config`.
BacktestResult index_proxy_backtest(const ReturnsPanel& panel, const BacktestConfig& config);
/// Like summarize, with turnover pinned to the proxy's assumed 5% a year.
MetricsReport summarize_index_proxy(const BacktestResult& proxy);

}  // namespace qsw
