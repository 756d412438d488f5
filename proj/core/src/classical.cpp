#include "qsw/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qsw/error.hpp"

namespace qsw {

std::string_view to_string(BenchmarkMethod method) {
  switch (method) {
    case BenchmarkMethod::mpt_max_sharpe: return "mpt_max_sharpe";
    case BenchmarkMethod::classical_stationary: return "classical_stationary";
    case BenchmarkMethod::index_proxy: return "index_proxy";
  }
  return "unknown";
}

Eigen::VectorXd classical_stationary(const Eigen::MatrixXd& C) {
  const auto n = C.rows();
  if (n == 0 || C.cols() != n) throw ParameterError("rate matrix must be non-empty and square");
  if (!C.allFinite() || C.minCoeff() < 0.0) throw ParameterError("rates must be finite and non-negative");

  Eigen::MatrixXd Q = C;
  Q.diagonal() -= C.colwise().sum().transpose();

  // Replace one balance equation with the normalization constraint.
  Eigen::MatrixXd A = Q;
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw NumericError("rate matrix is reducible; stationary law is not unique");
  Eigen::VectorXd pi = lu.solve(rhs);
  if (!pi.allFinite() || pi.minCoeff() <= 0.0) {
    throw NumericError("rate matrix is reducible; stationary law is not strictly positive");
  }
  pi /= pi.sum();

  // Uniformized chain M = I + Q / q is column-stochastic for q >= max |Q_jj|.
  const double q = 1.05 * Q.diagonal().cwiseAbs().maxCoeff();
  if (q > 0.0) {
    Eigen::MatrixXd M = Q / q;
    M.diagonal().array() += 1.0;
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const auto budget = std::max<long>(2000, static_cast<long>(4e7 / static_cast<double>(n * n)));
    for (long it = 0; it < budget; ++it) {
      Eigen::VectorXd next = M * p;
      next /= next.sum();
      const double step = (next - p).cwiseAbs().sum();
      p.swap(next);
      if (step < 1e-15) break;
    }
    // Only a converged power iterate is evidence; a slow chain is not a contradiction.
    const double residual = (M * p - p).cwiseAbs().sum();
    if (residual < 1e-13 && (p - pi).cwiseAbs().maxCoeff() > 1e-8) {
      throw NumericError("stationary law cross-check failed");
    }
  }
  return pi;
}

namespace {

// Euclidean projection onto {y >= 0, a^T y = 1}; requires some a_i > 0.
Eigen::VectorXd project_onto_slab(const Eigen::VectorXd& v, const Eigen::VectorXd& a) {
  auto phi = [&](double tau) { return a.dot((v + tau * a).cwiseMax(0.0)); };
  double lo = -1.0, hi = 1.0;
  while (phi(hi) < 1.0) hi *= 2.0;
  while (phi(lo) > 1.0) lo *= 2.0;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 1.0 ? lo : hi) = mid;
  }
  // Exact solve on the identified support.
  const double tau0 = 0.5 * (lo + hi);
  const Eigen::ArrayXd active = ((v + tau0 * a).array() > 0.0).cast<double>();
  const double denom = (active * a.array().square()).sum();
  double tau = tau0;
  if (denom > 0.0) tau = (1.0 - (active * a.array() * v.array()).sum()) / denom;
  Eigen::VectorXd y = (v + tau * a).cwiseMax(0.0);
  const double s = a.dot(y);
  if (s > 0.0) y /= s;
  return y;
}

struct QpSolution {
  Eigen::VectorXd y;
  double kkt = 0.0;
};

double kkt_residual(const Eigen::MatrixXd& S, const Eigen::VectorXd& a, const Eigen::VectorXd& y) {
  const Eigen::VectorXd Sy = S * y;
  const double nu = 2.0 * y.dot(Sy);  // multiplier of a^T y = 1
  const Eigen::VectorXd g = 2.0 * Sy - nu * a;
  const double scale = std::max(std::abs(nu) * a.cwiseAbs().maxCoeff(),
                                2.0 * S.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  const double ymax = y.maxCoeff();
  double r = std::abs(a.dot(y) - 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const bool inside = y(i) > 1e-12 * ymax;
    r = std::max(r, (inside ? std::abs(g(i)) : std::max(0.0, -g(i))) / scale);
    r = std::max(r, std::max(0.0, -y(i)) / std::max(ymax, 1e-300));
  }
  return r;
}

// Minimizes y^T S y over the free set with y_i = 0 elsewhere and a^T y = 1.
Eigen::VectorXd solve_on_support(const Eigen::MatrixXd& S, const Eigen::VectorXd& a,
                                 const std::vector<Eigen::Index>& support) {
  const auto k = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) K(r, c) = 2.0 * S(support[r], support[c]);
    K(r, k) = -a(support[r]);
    K(k, r) = a(support[r]);
  }
  rhs(k) = 1.0;
  const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(a.size());
  for (Eigen::Index r = 0; r < k; ++r) y(support[r]) = sol(r);
  return y;
}

// Primal active-set refinement warm-started from a feasible point.
Eigen::VectorXd active_set(const Eigen::MatrixXd& S, const Eigen::VectorXd& a, Eigen::VectorXd y) {
  const auto n = a.size();
  std::vector<bool> free(static_cast<std::size_t>(n));
  const double ymax = y.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) free[static_cast<std::size_t>(i)] = y(i) > 1e-9 * ymax;

  for (int it = 0; it < 10 * static_cast<int>(n) + 20; ++it) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (free[static_cast<std::size_t>(i)]) support.push_back(i);
    }
    Eigen::VectorXd target = solve_on_support(S, a, support);
    if (!target.allFinite() || std::abs(a.dot(target) - 1.0) > 1e-9) return y;

    // Step toward the subspace optimum, stopping at the first bound that becomes active.
    double step = 1.0;
    Eigen::Index blocking = -1;
    for (auto i : support) {
      if (target(i) < 0.0) {
        const double t = y(i) / (y(i) - target(i));
        if (t < step) {
          step = t;
          blocking = i;
        }
      }
    }
    y += step * (target - y);
    y = y.cwiseMax(0.0);
    if (blocking >= 0) {
      free[static_cast<std::size_t>(blocking)] = false;
      y(blocking) = 0.0;
      continue;
    }
    // Release the bound with the most negative multiplier, if any.
    const Eigen::VectorXd Sy = S * y;
    const double nu = 2.0 * y.dot(Sy);
    const Eigen::VectorXd g = 2.0 * Sy - nu * a;
    const double tol = 1e-12 * std::max(1.0, std::abs(nu) * a.cwiseAbs().maxCoeff());
    Eigen::Index worst = -1;
    double worst_g = -tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!free[static_cast<std::size_t>(i)] && g(i) < worst_g) {
        worst_g = g(i);
        worst = i;
      }
    }
    if (worst < 0) break;
    free[static_cast<std::size_t>(worst)] = true;
  }
  return y;
}

QpSolution solve_ratio_qp(const Eigen::MatrixXd& S, const Eigen::VectorXd& a) {
  const Eigen::VectorXd a_pos = a.cwiseMax(0.0);
  Eigen::VectorXd y = a_pos / a_pos.squaredNorm();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * std::max(0.0, es.eigenvalues().maxCoeff());
  if (lipschitz > 0.0) {
    Eigen::VectorXd z = y, prev = y;
    double t = 1.0;
    // Only needs to land near the optimal support; active_set finishes exactly.
    for (int it = 0; it < 3000; ++it) {
      const Eigen::VectorXd next = project_onto_slab(z - (2.0 / lipschitz) * (S * z), a);
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = next + ((t - 1.0) / t_next) * (next - prev);
      const double moved = (next - prev).cwiseAbs().maxCoeff();
      prev = next;
      t = t_next;
      if (moved <= 1e-14 * std::max(1.0, next.cwiseAbs().maxCoeff())) break;
    }
    y = prev;
  }
  y = active_set(S, a, y);
  return {y, kkt_residual(S, a, y)};
}

BenchmarkWeights finish(const QpSolution& sol, bool fallback) {
  BenchmarkWeights out;
  out.weights = sol.y.cwiseMax(0.0);
  out.weights /= out.weights.sum();
  out.fell_back_to_min_variance = fallback;
  out.kkt_residual = sol.kkt;
  out.method = BenchmarkMethod::mpt_max_sharpe;
  return out;
}

void check_covariance(const Eigen::MatrixXd& cov) {
  if (cov.rows() == 0 || cov.rows() != cov.cols()) throw ParameterError("covariance must be square");
  if (!cov.allFinite()) throw ParameterError("covariance has non-finite entries");
}

}  // namespace

BenchmarkWeights min_variance_long_only(const Eigen::MatrixXd& cov) {
  check_covariance(cov);
  const Eigen::MatrixXd S = 0.5 * (cov + cov.transpose());
  return finish(solve_ratio_qp(S, Eigen::VectorXd::Ones(cov.rows())), true);
}

BenchmarkWeights mpt_max_sharpe(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, double rf) {
  check_covariance(cov);
  if (mu.size() != cov.rows()) throw ParameterError("mu and covariance sizes differ");
  if (!mu.allFinite() || !std::isfinite(rf)) throw ParameterError("mu and rf must be finite");
  const Eigen::VectorXd excess = mu.array() - rf;
  if (excess.maxCoeff() <= 0.0) return min_variance_long_only(cov);
  const Eigen::MatrixXd S = 0.5 * (cov + cov.transpose());
  return finish(solve_ratio_qp(S, excess), false);
}

IndexProxy index_proxy(const ReturnsPanel& returns, RowRange window) {
  if (returns.assets() == 0 || window.end > returns.rows() || window.begin >= window.end) {
    throw DataError("index proxy needs a non-empty window inside the panel");
  }
  const Eigen::MatrixXd simple = returns.simple_returns();
  const auto n = static_cast<Eigen::Index>(returns.assets());
  const auto m = static_cast<Eigen::Index>(window.size());

  IndexProxy out;
  out.dates.assign(returns.dates.begin() + static_cast<std::ptrdiff_t>(window.begin),
                   returns.dates.begin() + static_cast<std::ptrdiff_t>(window.end));
  out.daily_returns.resize(m);
  out.equity.resize(m + 1);
  out.equity(0) = 1.0;
  Eigen::VectorXd holdings = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (Eigen::Index t = 0; t < m; ++t) {
    const double before = holdings.sum();
    holdings = holdings.cwiseProduct((simple.row(static_cast<Eigen::Index>(window.begin) + t).transpose()
                                          .array() + 1.0).matrix());
    const double after = holdings.sum();
    out.daily_returns(t) = after / before - 1.0;
    out.equity(t + 1) = after;
  }
  return out;
}

IndexProxy index_proxy(const ReturnsPanel& returns) {
  return index_proxy(returns, RowRange{0, returns.rows()});
}

}  // namespace qsw
