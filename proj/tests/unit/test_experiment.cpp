#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "qsw/csv.hpp"
#include "qsw/error.hpp"
#include "qsw/experiment.hpp"

using namespace qsw;

namespace {

ReturnsPanel small_universe(std::size_t n, std::size_t days = 400, std::uint64_t seed = 42) {
  SynthSpec spec;
  spec.n_assets = n;
  spec.n_sectors = std::min<std::size_t>(n, 2);
  spec.days = days;
  spec.seed = seed;
  return compute_returns(synthesize_universe(spec));
}

SweepOptions quick_options() {
  SweepOptions o;
  o.backtest.train_days = 100;
  return o;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("scenario presets") {
  const auto& p = scenario_presets();
  CHECK(p[0].name == "Ultra-Diversified");
  CHECK((p[0].alpha == 1 && p[0].beta == 100 && p[0].lambda_hold == 10));
  CHECK((p[1].alpha == 10 && p[1].beta == 10 && p[1].lambda_hold == 10));
  CHECK((p[2].alpha == 1 && p[2].beta == 10 && p[2].lambda_hold == 100));
  CHECK((p[3].alpha == 10 && p[3].beta == 1 && p[3].lambda_hold == 100));
  CHECK((p[4].alpha == 100 && p[4].beta == 1 && p[4].lambda_hold == 10));
  CHECK((p[5].alpha == 100 && p[5].beta == 10 && p[5].lambda_hold == 1));
  CHECK(p[5].name == "High-Activity");
}

TEST_CASE("grid expansion") {
  GridSpec g;
  CHECK(g.size() == 625);
  const auto configs = g.expand(QswParams{});
  CHECK(configs.size() == 625);
  CHECK(configs[0].alpha == 0.1);
  CHECK(configs[0].omega == 0.2);
  CHECK(configs[1].omega == 0.4);
  CHECK(configs[5].lambda_hold == 5);
  CHECK(configs[624].alpha == 500);
  std::set<std::tuple<double, double, double, double>> unique;
  for (const auto& c : configs) unique.insert({c.alpha, c.beta, c.lambda_hold, c.omega});
  CHECK(unique.size() == 625);
}

TEST_CASE("robustness subsets are reproducible draws without replacement") {
  RobustnessSpec spec;
  spec.n_draws = 7;
  spec.subset_size = 30;
  const auto a = robustness_subsets(120, spec);
  CHECK(a == robustness_subsets(120, spec));
  CHECK(a.size() == 7);
  for (const auto& s : a) {
    CHECK(s.size() == 30);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 30);
    CHECK(s.back() < 120);
  }
  CHECK(a[0] != a[1]);
  spec.seed = 7;
  CHECK(robustness_subsets(120, spec) != a);
  spec.subset_size = 121;
  CHECK_THROWS_AS(robustness_subsets(120, spec), ParameterError);
}

TEST_CASE("sweep record counts") {
  const ReturnsPanel p = small_universe(4);
  const SweepOptions o = quick_options();
  const auto s = run_scenarios(p, o, {0.5});
  CHECK(s.size() == 8);
  CHECK(std::count_if(s.begin(), s.end(), [](const SweepRecord& r) { return r.omega.has_value(); }) == 6);
  CHECK(s[6].strategy == kMptLabel);
  CHECK(s[7].strategy == kIndexLabel);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].run_id == i);
    CHECK(s[i].ok());
  }

  GridSpec one{{5}, {5}, {5}, {0.6}};
  const auto r = run_robustness(small_universe(6), o, one, RobustnessSpec{1, 4, 3});
  CHECK(r.records.size() == 3);
  CHECK(r.draws.size() == 1);
  CHECK(r.records[0].draw_id == 0u);
}

TEST_CASE("one-point grid equals a direct backtest") {
  const ReturnsPanel p = small_universe(5);
  const SweepOptions o = quick_options();
  QswParams q;
  q.alpha = 50;
  q.beta = 5;
  q.lambda_hold = 0.1;
  q.omega = 0.8;
  const auto g = run_grid(p, o, GridSpec{{50}, {5}, {0.1}, {0.8}});
  REQUIRE(g.size() == 1);
  const MetricsReport direct = summarize(run_backtest(p, make_qsw_strategy(q), o.backtest));
  CHECK(g[0].metrics.sharpe_ann == direct.sharpe_ann);
  CHECK(g[0].metrics.turnover_ann == direct.turnover_ann);
  CHECK(g[0].metrics.final_value == direct.final_value);
}

TEST_CASE("worker count does not change results") {
  const ReturnsPanel p = small_universe(5);
  SweepOptions o = quick_options();
  GridSpec g{{0.1, 50}, {5, 100}, {10}, {0.4, 1.0}};
  const std::string one = results_csv(run_grid(p, o, g));
  o.workers = 4;
  CHECK(results_csv(run_grid(p, o, g)) == one);
}

TEST_CASE("a poisoned config yields exactly one error row") {
  const ReturnsPanel p = small_universe(5);
  SweepOptions o = quick_options();
  GridSpec g{{1, 1e6}, {1}, {1}, {0.5}};
  const auto r = run_grid(p, o, g);
  REQUIRE(r.size() == 2);
  CHECK(r[0].ok());
  CHECK_FALSE(r[1].ok());
  CHECK(r[1].error.find("rescale") != std::string::npos);
  const auto clean = run_grid(p, o, GridSpec{{1}, {1}, {1}, {0.5}});
  CHECK(clean[0].metrics.sharpe_ann == r[0].metrics.sharpe_ann);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }));
}

TEST_CASE("results csv schema and round trip") {
  const ReturnsPanel p = small_universe(4);
  auto recs = run_scenarios(p, quick_options(), {0.3});
  recs[2].error = "bad, input\nhere";
  const std::string text = results_csv(recs);
  CHECK(text.substr(0, text.find('\n')) == kResultsHeader);
  CHECK(count_lines(text) == recs.size() + 1);
  CHECK(text.find("nan") == std::string::npos);
  const auto back = parse_results_csv(text);
  REQUIRE(back.size() == recs.size());
  CHECK(results_csv(back) == results_csv([&] {
          auto r = recs;
          r[2].error = csv::sanitize(r[2].error);
          return r;
        }()));
  CHECK(back[0].metrics.sharpe_ann == recs[0].metrics.sharpe_ann);
  CHECK_FALSE(back[7].alpha.has_value());
}

TEST_CASE("quantiles match an independent recomputation") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  for (std::size_t n : {1u, 2u, 5u, 10u, 37u}) {
    std::vector<double> v(n);
    for (double& x : v) x = z(rng);
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) CHECK(std::abs(quantile(v, q) - oracle::quantile7(v, q)) < 1e-15);
  }
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
}

TEST_CASE("summary medians") {
  const ReturnsPanel p = small_universe(4);
  const auto recs = run_scenarios(p, quick_options(), {0.2, 0.6, 1.0});
  const std::string s = summary_csv(recs);
  std::vector<double> sharpe;
  for (const auto& r : recs)
    if (r.strategy == "Moderate-Balanced") sharpe.push_back(r.metrics.sharpe_ann);
  const std::string key = "Moderate-Balanced,sharpe,3,";
  const auto pos = s.find(key);
  REQUIRE(pos != std::string::npos);
  const std::string line = s.substr(pos, s.find('\n', pos) - pos);
  const auto cells = csv::split(line);
  REQUIRE(cells.size() == 9);
  CHECK(std::stod(std::string(cells[6])) == oracle::quantile7(sharpe, 0.5));
  CHECK(std::stod(std::string(cells[5])) == oracle::quantile7(sharpe, 0.25));
}

TEST_CASE("report files") {
  const auto dir = std::filesystem::temp_directory_path() / "qsw_unit_report";
  std::filesystem::remove_all(dir);
  const ReturnsPanel p = small_universe(3);
  SweepOptions o = quick_options();
  o.keep_equity = true;
  const auto recs = run_grid(p, o, GridSpec{{1, 5, 50}, {1}, {1}, {0.5}});
  emit_report(recs, dir);
  CHECK(std::filesystem::exists(dir / "results.csv"));
  CHECK(std::filesystem::exists(dir / "summary.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "equity.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "boxplot.csv"));
  CHECK(count_lines(csv::read_file(dir / "results.csv")) == 4);
  emit_report(recs, dir, ReportOptions{true});
  CHECK(std::filesystem::exists(dir / "equity.csv"));
  CHECK(std::filesystem::exists(dir / "boxplot.csv"));
  CHECK_THROWS_AS(emit_report({}, dir), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("timing is opt-in") {
  const ReturnsPanel p = small_universe(3);
  SweepOptions o = quick_options();
  CHECK(run_index_record(p, o).wall_ms == 0.0);
  o.record_timing = true;
  CHECK(run_qsw_record(p, QswParams{}, o).wall_ms > 0.0);
}
