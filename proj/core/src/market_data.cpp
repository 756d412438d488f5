#include "qsw/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "qsw/csv.hpp"
#include "qsw/error.hpp"

namespace qsw {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "N/A" || s == "null" || s == "NULL";
}

// nullopt for a missing cell; NaN text is treated as missing as well.
std::optional<double> parse_cell(std::string_view cell, std::size_t line_no) {
  cell = trim(cell);
  if (is_missing_token(cell)) return std::nullopt;
  double value = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("line " + std::to_string(line_no) + ": malformed number '" +
                    std::string(cell) + "'");
  }
  if (std::isnan(value)) return std::nullopt;
  if (!std::isfinite(value) || value <= 0.0) {
    throw DataError("line " + std::to_string(line_no) + ": non-positive price '" +
                    std::string(cell) + "'");
  }
  return value;
}

std::string join_rows_csv(const std::vector<Date>& dates, const std::vector<std::string>& tickers,
                          const Eigen::MatrixXd& values) {
  std::ostringstream out;
  out << "date";
  for (const auto& t : tickers) out << ',' << t;
  out << '\n';
  for (std::size_t r = 0; r < dates.size(); ++r) {
    out << dates[r].str();
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << ',' << csv::format(values(static_cast<Eigen::Index>(r), c));
    }
    out << '\n';
  }
  return out.str();
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, std::span<const std::size_t> columns) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= static_cast<std::size_t>(m.cols())) {
      throw ParameterError("column index out of range");
    }
    out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(columns[k]));
  }
  return out;
}

std::vector<std::string> gather_names(const std::vector<std::string>& names,
                                      std::span<const std::size_t> columns) {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (auto c : columns) out.push_back(names.at(c));
  return out;
}

}  // namespace

PricePanel PricePanel::select_columns(std::span<const std::size_t> columns) const {
  return PricePanel{dates, gather_names(tickers, columns), gather_columns(prices, columns)};
}

ReturnsPanel ReturnsPanel::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw ParameterError("row slice outside panel");
  ReturnsPanel out;
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.tickers = tickers;
  out.returns = returns.middleRows(static_cast<Eigen::Index>(begin),
                                   static_cast<Eigen::Index>(end - begin));
  out.mode = mode;
  return out;
}

ReturnsPanel ReturnsPanel::select_columns(std::span<const std::size_t> columns) const {
  return ReturnsPanel{dates, gather_names(tickers, columns), gather_columns(returns, columns), mode};
}

Eigen::MatrixXd ReturnsPanel::simple_returns() const {
  if (mode == ReturnMode::simple) return returns;
  return returns.unaryExpr([](double r) { return std::expm1(r); });
}

PricePanel parse_prices_csv(const std::string& text, std::size_t min_history) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto f : csv::split(line)) header.emplace_back(trim(f));
    break;
  }
  if (header.size() < 2 || header.front() != "date") {
    throw DataError("prices CSV header must be 'date,<ticker>,...'");
  }
  const std::size_t n = header.size() - 1;
  {
    auto sorted = std::vector<std::string>(header.begin() + 1, header.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw DataError("duplicate ticker in header");
    }
    if (std::any_of(sorted.begin(), sorted.end(), [](const auto& t) { return t.empty(); })) {
      throw DataError("empty ticker name in header");
    }
  }

  struct RawRow {
    Date date;
    std::vector<std::optional<double>> cells;
  };
  std::vector<RawRow> raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != n + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(n + 1) +
                      " fields, got " + std::to_string(fields.size()));
    }
    RawRow row{Date::parse(trim(fields[0])), {}};
    row.cells.reserve(n);
    for (std::size_t c = 0; c < n; ++c) row.cells.push_back(parse_cell(fields[c + 1], line_no));
    raw.push_back(std::move(row));
  }

  std::sort(raw.begin(), raw.end(), [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
  for (std::size_t r = 1; r < raw.size(); ++r) {
    if (raw[r].date == raw[r - 1].date) throw DataError("duplicate date " + raw[r].date.str());
  }

  std::vector<std::size_t> keep_cols;
  for (std::size_t c = 0; c < n; ++c) {
    const auto valid = static_cast<std::size_t>(std::count_if(
        raw.begin(), raw.end(), [c](const RawRow& r) { return r.cells[c].has_value(); }));
    if (valid >= min_history) keep_cols.push_back(c);
  }
  if (keep_cols.empty()) throw DataError("no ticker has the required history");

  std::vector<const RawRow*> keep_rows;
  for (const auto& r : raw) {
    if (std::all_of(keep_cols.begin(), keep_cols.end(),
                    [&](std::size_t c) { return r.cells[c].has_value(); })) {
      keep_rows.push_back(&r);
    }
  }
  if (keep_rows.size() < 2) throw DataError("fewer than 2 complete price rows");

  PricePanel panel;
  panel.prices.resize(static_cast<Eigen::Index>(keep_rows.size()),
                      static_cast<Eigen::Index>(keep_cols.size()));
  for (auto c : keep_cols) panel.tickers.push_back(header[c + 1]);
  for (std::size_t r = 0; r < keep_rows.size(); ++r) {
    panel.dates.push_back(keep_rows[r]->date);
    for (std::size_t k = 0; k < keep_cols.size(); ++k) {
      panel.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          *keep_rows[r]->cells[keep_cols[k]];
    }
  }
  return panel;
}

PricePanel load_prices(const std::filesystem::path& path, std::size_t min_history) {
  return parse_prices_csv(csv::read_file(path), min_history);
}

void write_prices_csv(const PricePanel& panel, const std::filesystem::path& path) {
  csv::write_file(path, join_rows_csv(panel.dates, panel.tickers, panel.prices));
}

void write_returns_csv(const ReturnsPanel& panel, const std::filesystem::path& path) {
  csv::write_file(path, join_rows_csv(panel.dates, panel.tickers, panel.returns));
}

void write_stats_csv(const AssetStats& stats, std::span<const std::string> tickers,
                     const std::filesystem::path& path) {
  if (tickers.size() != stats.size()) throw ParameterError("ticker count does not match stats");
  std::ostringstream out;
  out << "ticker,mu,sigma,sr\n";
  for (std::size_t i = 0; i < tickers.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << tickers[i] << ',' << csv::format(stats.mu(k)) << ',' << csv::format(stats.sigma(k))
        << ',' << csv::format(stats.sr(k)) << '\n';
  }
  csv::write_file(path, out.str());
}

ReturnsPanel compute_returns(const PricePanel& panel, ReturnMode mode) {
  if (panel.rows() < 2) throw DataError("need at least 2 price rows to compute returns");
  const auto t = panel.prices.rows();
  const auto& p = panel.prices;
  ReturnsPanel out;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.tickers = panel.tickers;
  out.mode = mode;
  const Eigen::ArrayXXd ratio = p.bottomRows(t - 1).array() / p.topRows(t - 1).array();
  out.returns = mode == ReturnMode::log ? Eigen::MatrixXd(ratio.log().matrix())
                                        : Eigen::MatrixXd((ratio - 1.0).matrix());
  return out;
}

AssetStats compute_stats(const ReturnsPanel& returns, RowRange window) {
  if (window.end > returns.rows() || window.begin > window.end) {
    throw DataError("statistics window outside the returns panel");
  }
  if (window.size() < 2) throw DataError("statistics window needs at least 2 rows");

  const auto m = static_cast<double>(window.size());
  const auto block = returns.returns.middleRows(static_cast<Eigen::Index>(window.begin),
                                                static_cast<Eigen::Index>(window.size()));
  AssetStats s;
  s.mu = block.colwise().mean().transpose();
  const Eigen::MatrixXd centered = block.rowwise() - s.mu.transpose();
  s.cov = (centered.transpose() * centered) / (m - 1.0);
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  s.sr.setZero(s.mu.size());
  for (Eigen::Index i = 0; i < s.mu.size(); ++i) {
    // A constant column has exactly zero volatility; rounding in the mean must not leak through.
    if (block.col(i).maxCoeff() == block.col(i).minCoeff()) {
      s.cov.row(i).setZero();
      s.cov.col(i).setZero();
    }
  }
  s.sigma = s.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < s.mu.size(); ++i) {
    if (s.sigma(i) > 0.0) s.sr(i) = s.mu(i) / s.sigma(i);
  }
  return s;
}

AssetStats compute_stats(const ReturnsPanel& returns) {
  return compute_stats(returns, RowRange{0, returns.rows()});
}

std::vector<std::size_t> SynthSpec::sectors() const {
  std::vector<std::size_t> out(n_assets);
  for (std::size_t i = 0; i < n_assets; ++i) out[i] = i * n_sectors / n_assets;
  return out;
}

Eigen::MatrixXd SynthSpec::correlation() const {
  const auto sec = sectors();
  const auto n = static_cast<Eigen::Index>(n_assets);
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      c(i, j) = i == j ? 1.0
                       : (sec[static_cast<std::size_t>(i)] == sec[static_cast<std::size_t>(j)]
                              ? intra_sector_corr
                              : inter_sector_corr);
    }
  }
  return c;
}

void SynthSpec::validate() const {
  if (n_assets == 0) throw ParameterError("n_assets must be positive");
  if (n_sectors == 0 || n_sectors > n_assets) throw ParameterError("n_sectors must be in [1, n_assets]");
  if (days < 2) throw ParameterError("days must be at least 2");
  auto in_unit = [](double x) { return x >= 0.0 && x < 1.0; };
  if (!in_unit(intra_sector_corr) || !in_unit(inter_sector_corr)) {
    throw ParameterError("sector correlations must lie in [0, 1)");
  }
  if (!(mu_min <= mu_max) || !(vol_min <= vol_max) || vol_min < 0.0) {
    throw ParameterError("invalid drift or volatility range");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(correlation());
  if (llt.info() != Eigen::Success) throw ParameterError("sector correlation target is not positive definite");
}

PricePanel synthesize_universe(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_assets);
  const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(spec.correlation()).matrixL();

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Eigen::VectorXd drift(n), vol(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = spec.mu_min + (spec.mu_max - spec.mu_min) * unit(rng);
    const double v = spec.vol_min + (spec.vol_max - spec.vol_min) * unit(rng);
    drift(i) = (mu - 0.5 * v * v) / 252.0;
    vol(i) = v / std::sqrt(252.0);
  }

  PricePanel panel;
  const auto sec = spec.sectors();
  for (std::size_t i = 0; i < spec.n_assets; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "S%zuA%03zu", sec[i], i);
    panel.tickers.emplace_back(name);
  }

  Date d = spec.start;
  while (!d.is_weekday()) d = d.plus_days(1);
  panel.prices.resize(static_cast<Eigen::Index>(spec.days), n);
  panel.prices.row(0).setConstant(100.0);
  panel.dates.push_back(d);

  Eigen::VectorXd z(n);
  for (std::size_t t = 1; t < spec.days; ++t) {
    do d = d.plus_days(1);
    while (!d.is_weekday());
    panel.dates.push_back(d);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss(rng);
    const Eigen::VectorXd r = drift + vol.cwiseProduct(chol * z);
    const auto row = static_cast<Eigen::Index>(t);
    panel.prices.row(row) = panel.prices.row(row - 1).cwiseProduct(r.array().exp().matrix().transpose());
  }
  return panel;
}

}  // namespace qsw
