#include <benchmark/benchmark.h>

#include "qsw/classical.hpp"
#include "qsw/engine.hpp"
#include "qsw/experiment.hpp"
#include "qsw/graph.hpp"
#include "qsw/market_data.hpp"

namespace {

qsw::AssetStats universe_stats(std::size_t n) {
  qsw::SynthSpec spec;
  spec.n_assets = n;
  spec.n_sectors = std::min<std::size_t>(5, n);
  spec.days = 300;
  return qsw::compute_stats(qsw::compute_returns(qsw::synthesize_universe(spec)));
}

void BM_EvolveStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  qsw::QswParams p;
  p.omega = 0.5;
  p.update_mode = state.range(1) ? qsw::UpdateMode::eq : qsw::UpdateMode::alg;
  const auto kraus = qsw::build_kraus(qsw::build_graph(universe_stats(n), p), p);
  auto rho = qsw::DensityMatrix::maximally_mixed(n);
  for (auto _ : state) {
    rho = qsw::evolve_step(rho, kraus, p.update_mode);
    benchmark::DoNotOptimize(rho.rho.data());
  }
}
BENCHMARK(BM_EvolveStep)->ArgsProduct({{10, 20, 50, 100}, {0, 1}});

void BM_RunToStationary(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  qsw::QswParams p;
  p.alpha = 10;
  p.beta = 10;
  p.lambda_hold = 10;
  p.omega = 0.6;
  const auto graph = qsw::build_graph(universe_stats(n), p);
  int iters = 0;
  for (auto _ : state) {
    const auto r = qsw::run_to_stationary(graph, p);
    iters = r.iterations;
    benchmark::DoNotOptimize(r.weights.data());
  }
  state.counters["walk_iterations"] = iters;
}
BENCHMARK(BM_RunToStationary)->Arg(10)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_MaxSharpe(benchmark::State& state) {
  const auto stats = universe_stats(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto w = qsw::mpt_max_sharpe(stats.mu, stats.cov);
    benchmark::DoNotOptimize(w.weights.data());
  }
}
BENCHMARK(BM_MaxSharpe)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BacktestQsw(benchmark::State& state) {
  qsw::SynthSpec spec;
  spec.n_assets = static_cast<std::size_t>(state.range(0));
  spec.days = 800;
  const auto panel = qsw::compute_returns(qsw::synthesize_universe(spec));
  qsw::QswParams p;
  p.omega = 0.6;
  for (auto _ : state) {
    const auto r = qsw::run_backtest(panel, qsw::make_qsw_strategy(p), qsw::BacktestConfig{});
    benchmark::DoNotOptimize(r.equity.data());
  }
}
BENCHMARK(BM_BacktestQsw)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
