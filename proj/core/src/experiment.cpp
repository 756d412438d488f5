#include "qsw/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "qsw/classical.hpp"
#include "qsw/error.hpp"

namespace qsw {

const std::array<ScenarioPreset, 6>& scenario_presets() {
  static const std::array<ScenarioPreset, 6> presets{{
      {"Ultra-Diversified", 1.0, 100.0, 10.0},
      {"Moderate-Balanced", 10.0, 10.0, 10.0},
      {"Stability-Focused", 1.0, 10.0, 100.0},
      {"Balanced-Active", 10.0, 1.0, 100.0},
      {"Sharpe-Maximizer", 100.0, 1.0, 10.0},
      {"High-Activity", 100.0, 10.0, 1.0},
  }};
  return presets;
}

std::size_t GridSpec::size() const {
  return alpha_values.size() * beta_values.size() * lambda_values.size() * omega_values.size();
}

std::vector<QswParams> GridSpec::expand(const QswParams& base) const {
  std::vector<QswParams> out;
  out.reserve(size());
  for (double a : alpha_values)
    for (double b : beta_values)
      for (double l : lambda_values)
        for (double w : omega_values) {
          QswParams p = base;
          p.alpha = a;
          p.beta = b;
          p.lambda_hold = l;
          p.omega = w;
          out.push_back(p);
        }
  return out;
}

StationaryResult optimize(const ReturnsPanel& training, const QswParams& params) {
  const AssetStats stats = compute_stats(training);
  return run_to_stationary(build_graph(stats, params), params);
}

Strategy make_qsw_strategy(const QswParams& params) {
  params.validate();
  return [params](const ReturnsPanel& training) {
    const StationaryResult r = optimize(training, params);
    return StrategyOutput{r.weights, r.converged, r.iterations};
  };
}

Strategy make_mpt_strategy(double rf) {
  return [rf](const ReturnsPanel& training) {
    const AssetStats stats = compute_stats(training);
    return StrategyOutput{mpt_max_sharpe(stats.mu, stats.cov, rf).weights, true, 0};
  };
}

namespace {

using Clock = std::chrono::steady_clock;

template <class Body>
SweepRecord guarded(SweepRecord rec, const SweepOptions& options, Body&& body) {
  const auto t0 = Clock::now();
  try {
    BacktestResult bt = body();
    rec.metrics = rec.strategy == kIndexLabel ? summarize_index_proxy(bt) : summarize(bt);
    if (options.keep_equity) {
      rec.equity_dates = bt.dates;
      rec.equity.assign(bt.equity.data(), bt.equity.data() + bt.equity.size());
    }
  } catch (const std::exception& e) {
    rec.metrics = MetricsReport{};
    rec.metrics.converged = false;
    rec.error = e.what();
  }
  if (options.record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }
  return rec;
}

}  // namespace

SweepRecord run_qsw_record(const ReturnsPanel& panel, const QswParams& params, const SweepOptions& options,
                           std::string strategy_label) {
  SweepRecord rec;
  rec.strategy = std::move(strategy_label);
  rec.alpha = params.alpha;
  rec.beta = params.beta;
  rec.lambda_hold = params.lambda_hold;
  rec.omega = params.omega;
  return guarded(std::move(rec), options,
                 [&] { return run_backtest(panel, make_qsw_strategy(params), options.backtest); });
}

SweepRecord run_mpt_record(const ReturnsPanel& panel, const SweepOptions& options) {
  SweepRecord rec;
  rec.strategy = std::string(kMptLabel);
  return guarded(std::move(rec), options,
                 [&] { return run_backtest(panel, make_mpt_strategy(0.0), options.backtest); });
}

SweepRecord run_index_record(const ReturnsPanel& panel, const SweepOptions& options) {
  SweepRecord rec;
  rec.strategy = std::string(kIndexLabel);
  return guarded(std::move(rec), options, [&] { return index_proxy_backtest(panel, options.backtest); });
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count && !failed; i = next.fetch_add(1)) {
          try {
            fn(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<SweepRecord> run_scenarios(const ReturnsPanel& panel, const SweepOptions& options,
                                       const std::vector<double>& omega_values) {
  const auto& presets = scenario_presets();
  const std::size_t n_qsw = presets.size() * omega_values.size();
  std::vector<SweepRecord> records(n_qsw + 2);
  parallel_for(records.size(), options.workers, [&](std::size_t i) {
    if (i < n_qsw) {
      const auto& preset = presets[i / omega_values.size()];
      QswParams p = options.base;
      p.alpha = preset.alpha;
      p.beta = preset.beta;
      p.lambda_hold = preset.lambda_hold;
      p.omega = omega_values[i % omega_values.size()];
      records[i] = run_qsw_record(panel, p, options, std::string(preset.name));
    } else if (i == n_qsw) {
      records[i] = run_mpt_record(panel, options);
    } else {
      records[i] = run_index_record(panel, options);
    }
    records[i].run_id = i;
  });
  return records;
}

std::vector<SweepRecord> run_grid(const ReturnsPanel& panel, const SweepOptions& options, const GridSpec& grid) {
  const auto configs = grid.expand(options.base);
  std::vector<SweepRecord> records(configs.size());
  parallel_for(configs.size(), options.workers, [&](std::size_t i) {
    records[i] = run_qsw_record(panel, configs[i], options);
    records[i].run_id = i;
  });
  return records;
}

std::vector<std::vector<std::size_t>> robustness_subsets(std::size_t universe, const RobustnessSpec& spec) {
  if (spec.subset_size == 0 || spec.subset_size > universe) {
    throw ParameterError("subset size must lie in [1, universe size]");
  }
  std::vector<std::vector<std::size_t>> draws;
  draws.reserve(spec.n_draws);
  for (std::size_t d = 0; d < spec.n_draws; ++d) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(d)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> idx(universe);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates with explicit draws so the subset does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t k = 0; k < spec.subset_size; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng() % (universe - k));
      std::swap(idx[k], idx[j]);
    }
    idx.resize(spec.subset_size);
    std::sort(idx.begin(), idx.end());
    draws.push_back(std::move(idx));
  }
  return draws;
}

RobustnessResult run_robustness(const ReturnsPanel& panel, const SweepOptions& options, const GridSpec& grid,
                                const RobustnessSpec& spec) {
  const auto subsets = robustness_subsets(panel.assets(), spec);
  const auto configs = grid.expand(options.base);
  const std::size_t per_draw = configs.size() + 2;

  std::vector<ReturnsPanel> universes;
  universes.reserve(subsets.size());
  for (const auto& cols : subsets) universes.push_back(panel.select_columns(cols));

  RobustnessResult result;
  result.records.resize(subsets.size() * per_draw);
  parallel_for(result.records.size(), options.workers, [&](std::size_t k) {
    const std::size_t d = k / per_draw;
    const std::size_t i = k % per_draw;
    SweepRecord rec = i < configs.size() ? run_qsw_record(universes[d], configs[i], options)
                      : i == configs.size() ? run_mpt_record(universes[d], options)
                                            : run_index_record(universes[d], options);
    rec.run_id = i;
    rec.draw_id = d;
    result.records[k] = std::move(rec);
  });

  std::size_t sharpe_wins = 0, eff_wins = 0;
  for (std::size_t d = 0; d < subsets.size(); ++d) {
    DrawSummary s;
    s.draw_id = d;
    for (auto c : subsets[d]) s.tickers.push_back(panel.tickers[c]);
    const SweepRecord* best = nullptr;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const SweepRecord& r = result.records[d * per_draw + i];
      if (r.ok() && (!best || r.metrics.sharpe_ann > best->metrics.sharpe_ann)) best = &r;
    }
    const SweepRecord& mpt = result.records[d * per_draw + configs.size()];
    s.mpt_sharpe = mpt.metrics.sharpe_ann;
    s.mpt_efficiency = mpt.metrics.efficiency;
    if (best) {
      s.best_run_id = best->run_id;
      s.best_sharpe = best->metrics.sharpe_ann;
      s.best_efficiency = best->metrics.efficiency;
      s.qsw_wins_sharpe = !mpt.ok() || s.best_sharpe > s.mpt_sharpe;
      s.qsw_wins_efficiency = !mpt.ok() || s.best_efficiency > s.mpt_efficiency;
    }
    sharpe_wins += s.qsw_wins_sharpe;
    eff_wins += s.qsw_wins_efficiency;
    result.draws.push_back(std::move(s));
  }
  if (!subsets.empty()) {
    result.sharpe_win_rate = static_cast<double>(sharpe_wins) / static_cast<double>(subsets.size());
    result.efficiency_win_rate = static_cast<double>(eff_wins) / static_cast<double>(subsets.size());
  }
  return result;
}

}  // namespace qsw
