#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "qsw/csv.hpp"
#include "qsw/error.hpp"
#include "qsw/experiment.hpp"

namespace qsw {

namespace {

struct MetricField {
  std::string_view name;
  double MetricsReport::*member;
};

constexpr std::array<MetricField, 11> kMetricFields{{
    {"sharpe", &MetricsReport::sharpe_ann},
    {"cagr", &MetricsReport::cagr},
    {"vol", &MetricsReport::vol_ann},
    {"mdd", &MetricsReport::mdd},
    {"turnover_ann", &MetricsReport::turnover_ann},
    {"efficiency", &MetricsReport::efficiency},
    {"hhi", &MetricsReport::hhi_mean},
    {"n_eff", &MetricsReport::n_eff_mean},
    {"c5", &MetricsReport::c5_mean},
    {"cost_drag_bp", &MetricsReport::cost_drag_bp},
    {"final_value", &MetricsReport::final_value},
}};

std::string opt(const std::optional<double>& v) { return v ? csv::format(*v) : std::string(); }

double to_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("malformed number '" + std::string(s) + "' in results CSV");
  }
  return v;
}

std::size_t to_size(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw DataError("malformed integer '" + std::string(s) + "' in results CSV");
  }
  return v;
}

std::optional<double> opt_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return to_double(s);
}

// Strategy labels in order of first appearance.
std::vector<std::string> strategy_order(const std::vector<SweepRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.strategy) == out.end()) out.push_back(r.strategy);
  }
  return out;
}

std::vector<double> metric_values(const std::vector<SweepRecord>& records, const std::string& strategy,
                                  double MetricsReport::*member) {
  std::vector<double> v;
  for (const auto& r : records) {
    if (r.ok() && r.strategy == strategy) v.push_back(r.metrics.*member);
  }
  return v;
}

std::string boxplot_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "strategy,metric,min,q1,median,q3,max,whisker_low,whisker_high\n";
  for (const auto& label : strategy_order(records)) {
    for (const auto& f : kMetricFields) {
      auto v = metric_values(records, label, f.member);
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      const double q1 = quantile(v, 0.25), q3 = quantile(v, 0.75);
      const double iqr = q3 - q1;
      const double lo = *std::find_if(v.begin(), v.end(), [&](double x) { return x >= q1 - 1.5 * iqr; });
      const double hi = *std::find_if(v.rbegin(), v.rend(), [&](double x) { return x <= q3 + 1.5 * iqr; });
      out << label << ',' << f.name << ',' << csv::format(v.front()) << ',' << csv::format(q1) << ','
          << csv::format(quantile(v, 0.5)) << ',' << csv::format(q3) << ',' << csv::format(v.back()) << ','
          << csv::format(lo) << ',' << csv::format(hi) << '\n';
    }
  }
  return out.str();
}

std::string equity_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "run_id,draw_id,strategy,date,value\n";
  for (const auto& r : records) {
    for (std::size_t t = 0; t < r.equity.size(); ++t) {
      out << r.run_id << ',' << (r.draw_id ? std::to_string(*r.draw_id) : std::string()) << ',' << r.strategy
          << ',' << r.equity_dates[t].str() << ',' << csv::format(r.equity[t]) << '\n';
    }
  }
  return out.str();
}

}  // namespace

std::string results_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << (r.draw_id ? std::to_string(*r.draw_id) : std::string()) << ','
        << csv::sanitize(r.strategy) << ',' << opt(r.alpha) << ',' << opt(r.beta) << ',' << opt(r.lambda_hold)
        << ',' << opt(r.omega);
    for (const auto& f : kMetricFields) {
      out << ',';
      if (r.ok()) out << csv::format(r.metrics.*f.member);
    }
    out << ',' << (r.ok() && r.metrics.converged ? 1 : 0) << ',' << (r.ok() ? r.metrics.iterations : 0) << ','
        << csv::format(r.wall_ms) << ',' << csv::sanitize(r.error) << '\n';
  }
  return out.str();
}

std::vector<SweepRecord> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw DataError("results CSV header does not match the expected schema");

  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 22) throw DataError("results CSV row has " + std::to_string(f.size()) + " fields, expected 22");
    SweepRecord r;
    r.run_id = to_size(f[0]);
    if (!f[1].empty()) r.draw_id = to_size(f[1]);
    r.strategy = std::string(f[2]);
    r.alpha = opt_double(f[3]);
    r.beta = opt_double(f[4]);
    r.lambda_hold = opt_double(f[5]);
    r.omega = opt_double(f[6]);
    r.error = std::string(f[21]);
    if (r.ok()) {
      for (std::size_t k = 0; k < kMetricFields.size(); ++k) r.metrics.*kMetricFields[k].member = to_double(f[7 + k]);
    }
    r.metrics.converged = f[18] == "1";
    r.metrics.iterations = static_cast<int>(to_size(f[19]));
    r.wall_ms = to_double(f[20]);
    out.push_back(std::move(r));
  }
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ParameterError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string summary_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << "strategy,metric,count,mean,min,q25,median,q75,max\n";
  for (const auto& label : strategy_order(records)) {
    for (const auto& f : kMetricFields) {
      const auto v = metric_values(records, label, f.member);
      if (v.empty()) continue;
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      out << label << ',' << f.name << ',' << v.size() << ',' << csv::format(mean) << ','
          << csv::format(*std::min_element(v.begin(), v.end())) << ',' << csv::format(quantile(v, 0.25)) << ','
          << csv::format(quantile(v, 0.5)) << ',' << csv::format(quantile(v, 0.75)) << ','
          << csv::format(*std::max_element(v.begin(), v.end())) << '\n';
    }
  }
  return out.str();
}

void emit_report(const std::vector<SweepRecord>& records, const std::filesystem::path& dir,
                 const ReportOptions& options) {
  if (records.empty()) throw Error("no records to report");
  csv::write_file(dir / "results.csv", results_csv(records));
  csv::write_file(dir / "summary.csv", summary_csv(records));
  if (options.plots) {
    csv::write_file(dir / "boxplot.csv", boxplot_csv(records));
    const bool any_equity = std::any_of(records.begin(), records.end(), [](const auto& r) { return !r.equity.empty(); });
    if (any_equity) csv::write_file(dir / "equity.csv", equity_csv(records));
  }
}

std::string robustness_summary_csv(const RobustnessResult& result) {
  std::ostringstream out;
  out << "draw_id,best_run_id,best_sharpe,best_efficiency,mpt_sharpe,mpt_efficiency,qsw_wins_sharpe,"
         "qsw_wins_efficiency\n";
  for (const auto& d : result.draws) {
    out << d.draw_id << ',' << (d.best_run_id ? std::to_string(*d.best_run_id) : std::string()) << ','
        << csv::format(d.best_sharpe) << ',' << csv::format(d.best_efficiency) << ',' << csv::format(d.mpt_sharpe)
        << ',' << csv::format(d.mpt_efficiency) << ',' << (d.qsw_wins_sharpe ? 1 : 0) << ','
        << (d.qsw_wins_efficiency ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace qsw
