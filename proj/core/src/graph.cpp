#include "qsw/graph.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "qsw/csv.hpp"
#include "qsw/error.hpp"

namespace qsw {

namespace {

constexpr double kMaxExponent = 700.0;

void require_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ParameterError(std::string(what) + " must be a non-empty square matrix");
  }
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << csv::format(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace

void QswParams::validate() const {
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!finite_nonneg(alpha) || !finite_nonneg(beta) || !finite_nonneg(lambda_hold)) {
    throw ParameterError("alpha, beta and lambda must be finite and non-negative");
  }
  if (!(omega >= 0.0 && omega <= 1.0)) throw ParameterError("omega must lie in [0, 1]");
  if (!(damping > 0.0 && damping < 1.0)) throw ParameterError("damping must lie in (0, 1)");
  if (!std::isfinite(gamma1) || !std::isfinite(gamma2)) throw ParameterError("gamma scales must be finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
  if (!(tol > 0.0)) throw ParameterError("tol must be positive");
  if (max_iters < 1) throw ParameterError("max_iters must be at least 1");
}

Eigen::MatrixXd build_weight_matrix(const AssetStats& stats, const QswParams& params) {
  const auto n = static_cast<Eigen::Index>(stats.size());
  if (n < 1) throw ParameterError("weight matrix needs at least one asset");
  Eigen::MatrixXd W(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double arg = i == j ? params.lambda_hold * stats.sr(i)
                                : params.alpha * stats.sr(j) - params.beta * stats.cov(i, j);
      if (!std::isfinite(arg) || arg > kMaxExponent) {
        throw NumericError("weight exponent " + std::to_string(arg) +
                           " exceeds 700; rescale parameters");
      }
      W(i, j) = std::exp(arg);
    }
  }
  return W;
}

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& W) {
  require_square(W, "W");
  const Eigen::VectorXd sums = W.rowwise().sum();
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    if (!(sums(i) > 0.0) || !std::isfinite(sums(i))) {
      throw NumericError("row " + std::to_string(i) + " of W has no positive finite mass");
    }
  }
  return sums.cwiseInverse().asDiagonal() * W;
}

Eigen::MatrixXd google_matrix(const Eigen::MatrixXd& P, double damping) {
  require_square(P, "P");
  if (!(damping > 0.0 && damping < 1.0)) throw ParameterError("damping must lie in (0, 1)");
  const auto n = P.rows();
  return (damping * P).array() + (1.0 - damping) / static_cast<double>(n);
}

Eigen::MatrixXd normalize_covariance(const Eigen::MatrixXd& cov) {
  require_square(cov, "covariance");
  const double lo = cov.minCoeff();
  const double hi = cov.maxCoeff();
  if (!(hi > lo)) return Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  return (cov.array() - lo) / (hi - lo);
}

Eigen::MatrixXd build_hamiltonian(const AssetStats& stats, const QswParams& params) {
  const auto n = static_cast<Eigen::Index>(stats.size());
  if (n < 1) throw ParameterError("Hamiltonian needs at least one asset");
  Eigen::MatrixXd H = params.gamma2 * normalize_covariance(stats.cov);
  H.diagonal() = -params.gamma1 * stats.sr;
  return 0.5 * (H + H.transpose());
}

FinancialGraph build_graph(const AssetStats& stats, const QswParams& params) {
  params.validate();
  FinancialGraph g;
  g.W = build_weight_matrix(stats, params);
  g.P = row_normalize(g.W);
  g.G = google_matrix(g.P, params.damping);
  g.cov_hat = normalize_covariance(stats.cov);
  g.H = build_hamiltonian(stats, params);
  return g;
}

void dump_graph_csv(const FinancialGraph& graph, const std::filesystem::path& dir) {
  csv::write_file(dir / "W.csv", matrix_csv(graph.W));
  csv::write_file(dir / "P.csv", matrix_csv(graph.P));
  csv::write_file(dir / "G.csv", matrix_csv(graph.G));
  csv::write_file(dir / "H.csv", matrix_csv(graph.H));
}

}  // namespace qsw
