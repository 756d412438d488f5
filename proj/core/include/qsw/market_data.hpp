#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsw/date.hpp"

namespace qsw {

/// Daily adjusted close prices: rows are dates (strictly increasing), columns are tickers.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;  // [T x n], all > 0

  std::size_t rows() const { return dates.size(); }
  std::size_t assets() const { return tickers.size(); }

  /// Sub-universe with the given column indices, in the given order.
  PricePanel select_columns(std::span<const std::size_t> columns) const;
};

enum class ReturnMode { log, simple };

struct ReturnsPanel {
  std::vector<Date> dates;  // date of the closing price each return ends on
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;  // [T-1 x n]
  ReturnMode mode = ReturnMode::log;

  std::size_t rows() const { return dates.size(); }
  std::size_t assets() const { return tickers.size(); }

  /// Copy of rows [begin, end).
  ReturnsPanel slice_rows(std::size_t begin, std::size_t end) const;
  ReturnsPanel select_columns(std::span<const std::size_t> columns) const;

  /// Row-wise simple returns, converting exactly from log mode when needed.
  Eigen::MatrixXd simple_returns() const;
};

/// Half-open row range [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct AssetStats {
  Eigen::VectorXd mu;     // mean daily return
  Eigen::VectorXd sigma;  // sample standard deviation (m-1)
  Eigen::VectorXd sr;     // mu / sigma, 0 when sigma vanishes
  Eigen::MatrixXd cov;    // unbiased sample covariance

  std::size_t size() const { return static_cast<std::size_t>(mu.size()); }
};

/// Parameters of the block-correlated synthetic universe generator.
struct SynthSpec {
  std::size_t n_assets = 50;
  std::size_t n_sectors = 5;
  std::size_t days = 1827;  // price rows, weekdays only
  double intra_sector_corr = 0.6;
  double inter_sector_corr = 0.2;
  double mu_min = 0.02, mu_max = 0.20;    // annualized drift range
  double vol_min = 0.15, vol_max = 0.45;  // annualized volatility range
  std::uint64_t seed = 42;
  Date start = Date(2016, 1, 4);

  /// Throws ParameterError when a bound is violated or the implied correlation is not PD.
  void validate() const;
  /// Block-constant correlation target implied by the sector layout.
  Eigen::MatrixXd correlation() const;
  /// Sector index of each asset (contiguous blocks).
  std::vector<std::size_t> sectors() const;
};

/// Reads a prices CSV (`date,<ticker>...`). Tickers with fewer than `min_history`
/// valid cells are dropped, then every date row with a missing cell is dropped.
PricePanel load_prices(const std::filesystem::path& path, std::size_t min_history = 0);
/// Same as load_prices on in-memory CSV text.
PricePanel parse_prices_csv(const std::string& text, std::size_t min_history = 0);

void write_prices_csv(const PricePanel& panel, const std::filesystem::path& path);
void write_returns_csv(const ReturnsPanel& panel, const std::filesystem::path& path);
/// One row per ticker: `ticker,mu,sigma,sr`.
void write_stats_csv(const AssetStats& stats, std::span<const std::string> tickers,
                     const std::filesystem::path& path);

ReturnsPanel compute_returns(const PricePanel& panel, ReturnMode mode = ReturnMode::log);

/// Per-column statistics over the rows in `window`.
AssetStats compute_stats(const ReturnsPanel& returns, RowRange window);
/// Statistics over every row of `returns`.
AssetStats compute_stats(const ReturnsPanel& returns);

PricePanel synthesize_universe(const SynthSpec& spec);

}  // namespace qsw
