#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsw/backtest.hpp"
#include "qsw/engine.hpp"
#include "qsw/graph.hpp"
#include "qsw/market_data.hpp"

namespace qsw {

struct ScenarioPreset {
  std::string_view name;
  double alpha;
  double beta;
  double lambda_hold;
};

/// The six named (alpha, beta, lambda) investment-style presets.
const std::array<ScenarioPreset, 6>& scenario_presets();

struct GridSpec {
  std::vector<double> alpha_values{0.1, 5, 50, 100, 500};
  std::vector<double> beta_values{0.1, 5, 50, 100, 500};
  std::vector<double> lambda_values{0.1, 5, 50, 100, 500};
  std::vector<double> omega_values{0.2, 0.4, 0.6, 0.8, 1.0};

  std::size_t size() const;
  /// Alpha-major expansion (then beta, lambda, omega); other fields come from `base`.
  std::vector<QswParams> expand(const QswParams& base) const;
};

struct RobustnessSpec {
  std::size_t n_draws = 50;
  std::size_t subset_size = 100;
  std::uint64_t seed = 2024;
};

/// Shared knobs of every sweep.
struct SweepOptions {
  QswParams base;           // alpha/beta/lambda/omega overridden per config
  BacktestConfig backtest;
  std::size_t workers = 1;
  bool record_timing = false;  // off keeps results.csv a pure function of the inputs
  bool keep_equity = false;    // retain equity curves for plot data
};

struct SweepRecord {
  std::size_t run_id = 0;
  std::optional<std::size_t> draw_id;
  std::string strategy;
  std::optional<double> alpha, beta, lambda_hold, omega;
  MetricsReport metrics;
  double wall_ms = 0.0;
  std::string error;  // empty on success

  std::vector<Date> equity_dates;  // only with SweepOptions::keep_equity
  std::vector<double> equity;

  bool ok() const { return error.empty(); }
};

inline constexpr std::string_view kMptLabel = "mpt_max_sharpe";
inline constexpr std::string_view kIndexLabel = "index_proxy";
inline constexpr std::string_view kQswLabel = "qsw";

/// Stats over the training rows, graph, walk to stationarity, populations as weights.
Strategy make_qsw_strategy(const QswParams& params);
Strategy make_mpt_strategy(double rf = 0.0);

/// One QSW solve on the whole of `training`.
StationaryResult optimize(const ReturnsPanel& training, const QswParams& params);

/// Runs one labelled backtest; failures become an error-tagged record instead of throwing.
SweepRecord run_qsw_record(const ReturnsPanel& panel, const QswParams& params, const SweepOptions& options,
                           std::string strategy_label = std::string(kQswLabel));
SweepRecord run_mpt_record(const ReturnsPanel& panel, const SweepOptions& options);
SweepRecord run_index_record(const ReturnsPanel& panel, const SweepOptions& options);

/// 6 presets x omega_values QSW records, then the MPT and index-proxy records.
std::vector<SweepRecord> run_scenarios(const ReturnsPanel& panel, const SweepOptions& options,
                                       const std::vector<double>& omega_values);

/// One record per grid point, computed in parallel and returned in run_id order.
std::vector<SweepRecord> run_grid(const ReturnsPanel& panel, const SweepOptions& options, const GridSpec& grid);

struct DrawSummary {
  std::size_t draw_id = 0;
  std::vector<std::string> tickers;
  std::optional<std::size_t> best_run_id;  // best QSW by Sharpe among successful runs
  double best_sharpe = 0.0;
  double best_efficiency = 0.0;
  double mpt_sharpe = 0.0;
  double mpt_efficiency = 0.0;
  bool qsw_wins_sharpe = false;
  bool qsw_wins_efficiency = false;
};

struct RobustnessResult {
  std::vector<SweepRecord> records;  // sorted by (draw_id, run_id)
  std::vector<DrawSummary> draws;
  double sharpe_win_rate = 0.0;
  double efficiency_win_rate = 0.0;
};

/// Column subsets drawn without replacement, one per draw, reproducible from the seed.
std::vector<std::vector<std::size_t>> robustness_subsets(std::size_t universe, const RobustnessSpec& spec);

/// Per draw: the full grid on a random subset plus MPT and index proxy (|grid| + 2 records).
RobustnessResult run_robustness(const ReturnsPanel& panel, const SweepOptions& options, const GridSpec& grid,
                                const RobustnessSpec& spec);

/// Calls fn(i) for i in [0, count) on up to `workers` threads pulling from a shared counter.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

// ---- reporting -------------------------------------------------------------

inline constexpr std::string_view kResultsHeader =
    "run_id,draw_id,strategy,alpha,beta,lambda,omega,sharpe,cagr,vol,mdd,turnover_ann,efficiency,"
    "hhi,n_eff,c5,cost_drag_bp,final_value,converged,iterations,wall_ms,error";

std::string results_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> parse_results_csv(const std::string& text);

/// Type-7 (linear interpolation) sample quantile of unsorted values.
double quantile(std::vector<double> values, double p);

/// Per strategy label and metric: count, mean, min, q25, median, q75, max over successful rows.
std::string summary_csv(const std::vector<SweepRecord>& records);

struct ReportOptions {
  bool plots = false;  // also write equity.csv and boxplot.csv
};

/// Writes results.csv and summary.csv (plus plot data when requested) into `dir`.
/// Throws qsw::Error when `records` is empty or `dir` is unwritable.
void emit_report(const std::vector<SweepRecord>& records, const std::filesystem::path& dir,
                 const ReportOptions& options = {});

std::string robustness_summary_csv(const RobustnessResult& result);

}  // namespace qsw
