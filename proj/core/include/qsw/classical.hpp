#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qsw/market_data.hpp"

namespace qsw {

enum class BenchmarkMethod { mpt_max_sharpe, classical_stationary, index_proxy };

std::string_view to_string(BenchmarkMethod method);

struct BenchmarkWeights {
  Eigen::VectorXd weights;
  BenchmarkMethod method = BenchmarkMethod::mpt_max_sharpe;
  /// Set when no asset beats the risk-free rate and the long-only minimum-variance
  /// portfolio was returned instead.
  bool fell_back_to_min_variance = false;
  /// Scale-free KKT violation of the final solution.
  double kkt_residual = 0.0;
};

/// Stationary law of the continuous-time chain whose rate from j to i is C(i, j):
/// Q pi = 0 with Q = C - diag(1^T C), sum(pi) = 1, pi > 0. Solved as a dense linear
/// system and cross-checked by power iteration on the uniformized chain.
Eigen::VectorXd classical_stationary(const Eigen::MatrixXd& C);

/// Long-only maximum-Sharpe portfolio: argmax (w^T mu - rf) / sqrt(w^T cov w) on the simplex.
/// Solved as min y^T cov y s.t. y^T (mu - rf) = 1, y >= 0, then w = y / sum(y).
BenchmarkWeights mpt_max_sharpe(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, double rf = 0.0);

/// Long-only minimum-variance portfolio.
BenchmarkWeights min_variance_long_only(const Eigen::MatrixXd& cov);

/// Daily series of the equal-weighted buy-and-hold universe.
struct IndexProxy {
  std::vector<Date> dates;
  Eigen::VectorXd daily_returns;  // simple returns
  Eigen::VectorXd equity;         // value after each day, starting from 1 before the first day
  /// Annual turnover assumed for the index in efficiency and cost computations.
  static constexpr double kAssumedTurnover = 0.05;
  double turnover_assumption = kAssumedTurnover;
};

/// Equal-weight buy-and-hold over rows [window.begin, window.end).
IndexProxy index_proxy(const ReturnsPanel& returns, RowRange window);
IndexProxy index_proxy(const ReturnsPanel& returns);

}  // namespace qsw
