// qsw: command-line front end for quantum-stochastic-walk portfolio experiments.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsw/backtest.hpp"
#include "qsw/classical.hpp"
#include "qsw/csv.hpp"
#include "qsw/engine.hpp"
#include "qsw/error.hpp"
#include "qsw/experiment.hpp"
#include "qsw/graph.hpp"
#include "qsw/market_data.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kSweepErrors = 3 };

struct CommonArgs {
  std::string prices;
  std::size_t min_history = 0;
  std::string return_mode = "log";
  std::size_t train_days = 252;
  std::string start, end;
  std::string rebalance = "quarterly";
  std::string turnover = "paper";
  double cost_bp = 20.0;
  qsw::QswParams params;
  std::string mode = "alg";
  std::uint64_t seed = 2024;
  std::size_t workers = 1;
  std::string out;
  bool plots = false;
  bool record_timing = false;
};

void add_data_flags(CLI::App* cmd, CommonArgs& a, bool required_prices = true) {
  auto* opt = cmd->add_option("--prices", a.prices, "Prices CSV (date,<ticker>,...)");
  if (required_prices) opt->required();
  opt->check(CLI::ExistingFile);
  cmd->add_option("--min-history", a.min_history, "Drop tickers with fewer valid rows");
  cmd->add_option("--return-mode", a.return_mode, "Return definition for statistics")
      ->check(CLI::IsMember({"log", "simple"}));
  cmd->add_option("--train-days", a.train_days, "Training window in trading days (252, 504, ...)")
      ->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--end", a.end, "Last date used (YYYY-MM-DD)");
}

void add_backtest_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--start", a.start, "First rebalance on or after this date (YYYY-MM-DD)");
  cmd->add_option("--rebalance", a.rebalance, "Rebalance calendar")->check(CLI::IsMember({"quarterly", "monthly"}));
  cmd->add_option("--turnover", a.turnover, "Turnover convention")->check(CLI::IsMember({"paper", "drift"}));
  cmd->add_option("--cost-bp", a.cost_bp, "Cost in bp per 100% turnover")->check(CLI::NonNegativeNumber);
}

void add_walk_flags(CLI::App* cmd, CommonArgs& a, bool with_hyper = true) {
  auto& p = a.params;
  if (with_hyper) {
    cmd->add_option("--alpha", p.alpha, "Return preference")->check(CLI::NonNegativeNumber);
    cmd->add_option("--beta", p.beta, "Covariance penalty")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda", p.lambda_hold, "Holding coefficient")->check(CLI::NonNegativeNumber);
    cmd->add_option("--omega", p.omega, "Quantum-classical mix")->check(CLI::Range(0.0, 1.0));
  }
  cmd->add_option("--damping", p.damping, "Google-matrix damping")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--gamma1", p.gamma1, "Hamiltonian diagonal scale");
  cmd->add_option("--gamma2", p.gamma2, "Hamiltonian coupling scale");
  cmd->add_option("--dt", p.dt, "Time step")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", p.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", p.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--mode", a.mode, "Update rule")->check(CLI::IsMember({"alg", "eq"}));
}

void add_sweep_flags(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_flag("--plots", a.plots, "Also write equity.csv and boxplot.csv");
  cmd->add_flag("--record-timing", a.record_timing, "Fill wall_ms (makes results.csv non-reproducible)");
}

qsw::QswParams walk_params(const CommonArgs& a) {
  qsw::QswParams p = a.params;
  p.update_mode = a.mode == "eq" ? qsw::UpdateMode::eq : qsw::UpdateMode::alg;
  p.validate();
  return p;
}

qsw::BacktestConfig backtest_config(const CommonArgs& a) {
  qsw::BacktestConfig c;
  c.train_days = a.train_days;
  if (!a.start.empty()) c.start = qsw::Date::parse(a.start);
  if (!a.end.empty()) c.end = qsw::Date::parse(a.end);
  c.rebalance = a.rebalance == "monthly" ? qsw::RebalanceRule::monthly : qsw::RebalanceRule::quarterly;
  c.turnover_convention =
      a.turnover == "drift" ? qsw::TurnoverConvention::drift_aware : qsw::TurnoverConvention::paper_literal;
  c.cost_bp_per_100_turnover = a.cost_bp;
  c.validate();
  return c;
}

qsw::ReturnsPanel load_returns(const CommonArgs& a) {
  const auto panel = qsw::load_prices(a.prices, a.min_history);
  return qsw::compute_returns(panel, a.return_mode == "simple" ? qsw::ReturnMode::simple : qsw::ReturnMode::log);
}

// Training rows for single-window commands: the last train_days rows dated on or before --end.
qsw::ReturnsPanel training_window(const qsw::ReturnsPanel& r, const CommonArgs& a) {
  std::size_t end = r.rows();
  if (!a.end.empty()) {
    const auto limit = qsw::Date::parse(a.end);
    end = static_cast<std::size_t>(std::upper_bound(r.dates.begin(), r.dates.end(), limit) - r.dates.begin());
  }
  if (end < 2) throw qsw::DataError("fewer than 2 return rows before --end");
  const std::size_t begin = end > a.train_days ? end - a.train_days : 0;
  return r.slice_rows(begin, end);
}

qsw::SweepOptions sweep_options(const CommonArgs& a) {
  qsw::SweepOptions o;
  o.base = walk_params(a);
  o.backtest = backtest_config(a);
  o.workers = a.workers;
  o.record_timing = a.record_timing;
  o.keep_equity = a.plots;
  return o;
}

int finish_sweep(const std::vector<qsw::SweepRecord>& records, const CommonArgs& a) {
  qsw::emit_report(records, a.out, qsw::ReportOptions{a.plots});
  const auto failed = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok(); });
  std::cout << records.size() << " records written to " << (fs::path(a.out) / "results.csv").string();
  if (failed) std::cout << " (" << failed << " error-tagged)";
  std::cout << '\n';
  return failed ? kSweepErrors : kOk;
}

void print_metrics(const qsw::SweepRecord& r) {
  if (!r.ok()) {
    std::cout << r.strategy << ": error: " << r.error << '\n';
    return;
  }
  const auto& m = r.metrics;
  std::printf("%-16s sharpe %.4f  cagr %.4f  vol %.4f  mdd %.4f  turnover %.4f  eff %.4f  hhi %.4f  "
              "n_eff %.2f  c5 %.4f  cost %.2fbp  final %.4f\n",
              r.strategy.c_str(), m.sharpe_ann, m.cagr, m.vol_ann, m.mdd, m.turnover_ann, m.efficiency, m.hhi_mean,
              m.n_eff_mean, m.c5_mean, m.cost_drag_bp, m.final_value);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (auto f : qsw::csv::split(text)) {
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(std::string(f), &used);
      if (used != f.size()) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw qsw::ParameterError("bad number '" + std::string(f) + "' in list");
    }
    out.push_back(v);
  }
  if (out.empty()) throw qsw::ParameterError("empty value list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-stochastic-walk portfolio optimization"};
  app.require_subcommand(1);
  CommonArgs a;

  // synth
  qsw::SynthSpec synth;
  std::string synth_start = "2016-01-04";
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic block-correlated price panel");
  cmd_synth->add_option("--n-assets", synth.n_assets)->check(CLI::PositiveNumber);
  cmd_synth->add_option("--n-sectors", synth.n_sectors)->check(CLI::PositiveNumber);
  cmd_synth->add_option("--days", synth.days, "Price rows (weekdays)");
  cmd_synth->add_option("--intra-corr", synth.intra_sector_corr);
  cmd_synth->add_option("--inter-corr", synth.inter_sector_corr);
  cmd_synth->add_option("--mu-min", synth.mu_min);
  cmd_synth->add_option("--mu-max", synth.mu_max);
  cmd_synth->add_option("--vol-min", synth.vol_min);
  cmd_synth->add_option("--vol-max", synth.vol_max);
  cmd_synth->add_option("--start-date", synth_start);
  cmd_synth->add_option("--seed", synth.seed);
  cmd_synth->add_option("--out", a.out, "Output directory (prices.csv)")->required();

  // stats
  auto* cmd_stats = app.add_subcommand("stats", "Per-asset statistics over the last training window");
  add_data_flags(cmd_stats, a);
  cmd_stats->add_option("--out", a.out, "Output directory (stats.csv, cov.csv)");

  // optimize
  std::string dump_graph, trace_path;
  auto* cmd_opt = app.add_subcommand("optimize", "One walk solve on the last training window; prints weights");
  add_data_flags(cmd_opt, a);
  add_walk_flags(cmd_opt, a);
  cmd_opt->add_option("--dump-graph", dump_graph, "Write W/P/G/H CSV matrices into this directory");
  cmd_opt->add_option("--trace", trace_path, "Write the per-iteration trace CSV here");
  cmd_opt->add_option("--out", a.out, "Output directory (weights.csv)");

  // backtest
  std::string strategy = "qsw";
  auto* cmd_bt = app.add_subcommand("backtest", "Rolling backtest of one strategy");
  add_data_flags(cmd_bt, a);
  add_backtest_flags(cmd_bt, a);
  add_walk_flags(cmd_bt, a);
  cmd_bt->add_option("--strategy", strategy)->check(CLI::IsMember({"qsw", "mpt", "index"}));
  add_sweep_flags(cmd_bt, a);

  // scenarios
  std::string omegas = "0.2,0.4,0.6,0.8,1.0";
  auto* cmd_sc = app.add_subcommand("scenarios", "Six presets x omega values, plus MPT and index proxy");
  add_data_flags(cmd_sc, a);
  add_backtest_flags(cmd_sc, a);
  add_walk_flags(cmd_sc, a, false);
  cmd_sc->add_option("--omegas", omegas, "Comma-separated omega values");
  add_sweep_flags(cmd_sc, a);

  // grid / robustness
  std::string alphas = "0.1,5,50,100,500", betas = alphas, lambdas = alphas;
  auto add_grid_lists = [&](CLI::App* cmd) {
    cmd->add_option("--alphas", alphas);
    cmd->add_option("--betas", betas);
    cmd->add_option("--lambdas", lambdas);
    cmd->add_option("--omegas", omegas);
  };
  auto* cmd_grid = app.add_subcommand("grid", "Full hyper-parameter grid");
  add_data_flags(cmd_grid, a);
  add_backtest_flags(cmd_grid, a);
  add_walk_flags(cmd_grid, a, false);
  add_grid_lists(cmd_grid);
  add_sweep_flags(cmd_grid, a);

  qsw::RobustnessSpec rob;
  auto* cmd_rob = app.add_subcommand("robustness", "Grid on random sub-universes, plus MPT and index proxy");
  add_data_flags(cmd_rob, a);
  add_backtest_flags(cmd_rob, a);
  add_walk_flags(cmd_rob, a, false);
  add_grid_lists(cmd_rob);
  cmd_rob->add_option("--draws", rob.n_draws)->check(CLI::PositiveNumber);
  cmd_rob->add_option("--subset", rob.subset_size)->check(CLI::PositiveNumber);
  cmd_rob->add_option("--seed", a.seed, "Sub-universe sampling seed");
  add_sweep_flags(cmd_rob, a);

  // report
  std::string input;
  auto* cmd_rep = app.add_subcommand("report", "Rebuild summary.csv (and plot data) from a results.csv");
  cmd_rep->add_option("--in", input, "results.csv to summarize")->required()->check(CLI::ExistingFile);
  cmd_rep->add_option("--out", a.out, "Output directory")->required();
  cmd_rep->add_flag("--plots", a.plots, "Also write boxplot.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*cmd_synth) {
      synth.start = qsw::Date::parse(synth_start);
      const auto panel = qsw::synthesize_universe(synth);
      const auto path = fs::path(a.out) / "prices.csv";
      qsw::write_prices_csv(panel, path);
      std::cout << "wrote " << panel.rows() << " rows x " << panel.assets() << " assets to " << path.string() << '\n';
      return kOk;
    }

    if (*cmd_stats) {
      const auto window = training_window(load_returns(a), a);
      const auto stats = qsw::compute_stats(window);
      if (!a.out.empty()) {
        qsw::write_stats_csv(stats, window.tickers, fs::path(a.out) / "stats.csv");
        std::ostringstream cov;
        cov << "ticker";
        for (const auto& t : window.tickers) cov << ',' << t;
        cov << '\n';
        for (Eigen::Index i = 0; i < stats.cov.rows(); ++i) {
          cov << window.tickers[static_cast<std::size_t>(i)];
          for (Eigen::Index j = 0; j < stats.cov.cols(); ++j) cov << ',' << qsw::csv::format(stats.cov(i, j));
          cov << '\n';
        }
        qsw::csv::write_file(fs::path(a.out) / "cov.csv", cov.str());
      }
      std::cout << "ticker,mu,sigma,sr\n";
      for (std::size_t i = 0; i < window.assets(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        std::cout << window.tickers[i] << ',' << qsw::csv::format(stats.mu(k)) << ','
                  << qsw::csv::format(stats.sigma(k)) << ',' << qsw::csv::format(stats.sr(k)) << '\n';
      }
      return kOk;
    }

    if (*cmd_opt) {
      const auto params = walk_params(a);
      const auto window = training_window(load_returns(a), a);
      const auto graph = qsw::build_graph(qsw::compute_stats(window), params);
      if (!dump_graph.empty()) qsw::dump_graph_csv(graph, dump_graph);
      std::vector<qsw::TraceRow> trace;
      const auto result = qsw::run_to_stationary(graph, params, std::nullopt, trace_path.empty() ? nullptr : &trace);
      if (!trace_path.empty()) qsw::write_trace_csv(trace, trace_path);
      std::ostringstream w;
      w << "ticker,weight\n";
      for (std::size_t i = 0; i < window.assets(); ++i) {
        w << window.tickers[i] << ',' << qsw::csv::format(result.weights(static_cast<Eigen::Index>(i))) << '\n';
      }
      if (!a.out.empty()) qsw::csv::write_file(fs::path(a.out) / "weights.csv", w.str());
      std::cout << w.str() << "# converged=" << (result.converged ? 1 : 0) << " iterations=" << result.iterations
                << " final_delta=" << qsw::csv::format(result.final_delta) << '\n';
      return kOk;
    }

    if (*cmd_bt) {
      const auto options = sweep_options(a);
      const auto returns = load_returns(a);
      qsw::SweepRecord rec = strategy == "mpt"     ? qsw::run_mpt_record(returns, options)
                             : strategy == "index" ? qsw::run_index_record(returns, options)
                                                   : qsw::run_qsw_record(returns, options.base, options);
      print_metrics(rec);
      if (rec.ok() && strategy != "index") {
        // Weight history only exists for rebalancing strategies; rerun is cheap next to a sweep.
        const auto bt = qsw::run_backtest(
            returns, strategy == "mpt" ? qsw::make_mpt_strategy() : qsw::make_qsw_strategy(options.base),
            options.backtest);
        std::ostringstream w;
        w << "date";
        for (const auto& t : returns.tickers) w << ',' << t;
        w << '\n';
        for (const auto& reb : bt.rebalances) {
          w << reb.date.str();
          for (Eigen::Index i = 0; i < reb.target.size(); ++i) w << ',' << qsw::csv::format(reb.target(i));
          w << '\n';
        }
        qsw::csv::write_file(fs::path(a.out) / "weights.csv", w.str());
      }
      return finish_sweep({rec}, a);
    }

    if (*cmd_sc) {
      const auto options = sweep_options(a);
      return finish_sweep(qsw::run_scenarios(load_returns(a), options, parse_list(omegas)), a);
    }

    const auto grid_spec = [&] {
      qsw::GridSpec g;
      g.alpha_values = parse_list(alphas);
      g.beta_values = parse_list(betas);
      g.lambda_values = parse_list(lambdas);
      g.omega_values = parse_list(omegas);
      return g;
    };

    if (*cmd_grid) {
      const auto options = sweep_options(a);
      return finish_sweep(qsw::run_grid(load_returns(a), options, grid_spec()), a);
    }

    if (*cmd_rob) {
      const auto options = sweep_options(a);
      rob.seed = a.seed;
      const auto result = qsw::run_robustness(load_returns(a), options, grid_spec(), rob);
      qsw::csv::write_file(fs::path(a.out) / "robustness_summary.csv", qsw::robustness_summary_csv(result));
      std::printf("QSW-best vs MPT win rate: sharpe %.1f%%, efficiency %.1f%% over %zu draws\n",
                  100.0 * result.sharpe_win_rate, 100.0 * result.efficiency_win_rate, result.draws.size());
      return finish_sweep(result.records, a);
    }

    if (*cmd_rep) {
      const auto records = qsw::parse_results_csv(qsw::csv::read_file(input));
      qsw::emit_report(records, a.out, qsw::ReportOptions{a.plots});
      std::cout << "summarized " << records.size() << " records into " << (fs::path(a.out) / "summary.csv").string()
                << '\n';
      return kOk;
    }
  } catch (const qsw::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const qsw::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
