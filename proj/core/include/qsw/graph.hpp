#pragma once

#include <cstddef>
#include <filesystem>

#include <Eigen/Dense>

#include "qsw/market_data.hpp"

namespace qsw {

enum class UpdateMode {
  alg,  // coherent step, then jumps fed by the post-coherent populations, then normalize
  eq,   // rho' = K0 rho K0^dagger + diag(Gamma * diag(rho)), exactly trace preserving
};

/// Walk hyper-parameters. Defaults follow the reference procedure
/// (damping 0.9, gamma1 = gamma2 = 100, dt = 0.1, tol = 1e-8, 5000 iterations).
struct QswParams {
  double alpha = 1.0;        // preference for high-Sharpe destinations
  double beta = 1.0;         // covariance penalty on transitions
  double lambda_hold = 1.0;  // self-loop holding reward
  double omega = 0.5;        // 0 = coherent, 1 = classical
  double damping = 0.9;
  double gamma1 = 100.0;
  double gamma2 = 100.0;
  double dt = 0.1;
  double tol = 1e-8;
  int max_iters = 5000;
  UpdateMode update_mode = UpdateMode::alg;

  /// Throws ParameterError when a bound is violated.
  void validate() const;
};

/// Classical channel (W, P, G) and coherent channel (H) of the asset graph.
struct FinancialGraph {
  Eigen::MatrixXd W;        // strictly positive preference weights
  Eigen::MatrixXd P;        // row-stochastic transitions
  Eigen::MatrixXd G;        // damped Google matrix, strictly positive
  Eigen::MatrixXd H;        // real symmetric Hamiltonian
  Eigen::MatrixXd cov_hat;  // min-max normalized covariance in [0, 1]

  std::size_t size() const { return static_cast<std::size_t>(G.rows()); }
};

/// W_ij = exp(alpha SR_j - beta Sigma_ij) off the diagonal, W_ii = exp(lambda SR_i).
/// Throws NumericError("... rescale parameters") when an exponent exceeds 700.
Eigen::MatrixXd build_weight_matrix(const AssetStats& stats, const QswParams& params);

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& W);

/// G = damping P + (1 - damping) 11^T / n.
Eigen::MatrixXd google_matrix(const Eigen::MatrixXd& P, double damping);

/// Min-max scaling over every entry (diagonal included); a constant matrix maps to zero.
Eigen::MatrixXd normalize_covariance(const Eigen::MatrixXd& cov);

/// H_ii = -gamma1 SR_i, H_ij = gamma2 cov_hat_ij.
Eigen::MatrixXd build_hamiltonian(const AssetStats& stats, const QswParams& params);

FinancialGraph build_graph(const AssetStats& stats, const QswParams& params);

/// Writes W.csv, P.csv, G.csv, H.csv (row-major, no header) into `dir`.
void dump_graph_csv(const FinancialGraph& graph, const std::filesystem::path& dir);

}  // namespace qsw
