#include "qsw/engine.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "qsw/csv.hpp"
#include "qsw/error.hpp"

namespace qsw {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kMinEigenvalue = -1e-8;
constexpr double kWeightDust = 1e-12;

double min_eigenvalue(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool all_finite(const Eigen::MatrixXcd& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

}  // namespace

DensityMatrix DensityMatrix::maximally_mixed(std::size_t n) {
  if (n == 0) throw ParameterError("density matrix dimension must be positive");
  const auto k = static_cast<Eigen::Index>(n);
  return DensityMatrix{Eigen::MatrixXcd::Identity(k, k) / static_cast<double>(n)};
}

void DensityMatrix::validate() const {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw ParameterError("rho must be square");
  if (!all_finite(rho)) throw ParameterError("rho has non-finite entries");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw ParameterError("rho is not Hermitian");
  }
  if (std::abs(rho.trace() - 1.0) > kTraceTol) throw ParameterError("rho does not have unit trace");
  if (min_eigenvalue(rho) < kMinEigenvalue) throw ParameterError("rho is not positive semidefinite");
}

Eigen::MatrixXcd hermitian_unitary(const Eigen::MatrixXd& H, double s) {
  if (H.rows() != H.cols() || H.rows() == 0) throw ParameterError("H must be a non-empty square matrix");
  if (!H.allFinite() || !std::isfinite(s)) throw NumericError("H has non-finite entries");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParameterError("H must be symmetric");
  }
  if (s == 0.0) return Eigen::MatrixXcd::Identity(H.rows(), H.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of H failed");
  const Eigen::MatrixXcd V = es.eigenvectors().cast<std::complex<double>>();
  const Eigen::VectorXcd phases =
      (std::complex<double>(0.0, -s) * es.eigenvalues().cast<std::complex<double>>()).array().exp();
  return V * phases.asDiagonal() * V.transpose();
}

KrausSet build_kraus(const FinancialGraph& graph, const QswParams& params) {
  params.validate();
  const auto n = graph.G.rows();
  if (n == 0 || graph.G.cols() != n || graph.H.rows() != n) {
    throw ParameterError("graph matrices have inconsistent shapes");
  }
  KrausSet k;
  k.Gamma = graph.G.unaryExpr([&](double c) { return -std::expm1(-params.omega * c * params.dt); });
  k.decay = k.Gamma.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(k.decay(j) < 1.0)) {
      throw NumericError("time step too large; reduce dt (decay " + std::to_string(k.decay(j)) +
                         " at node " + std::to_string(j) + ")");
    }
  }
  k.keep = (1.0 - k.decay.array()).sqrt();
  k.unitary = hermitian_unitary(graph.H, (1.0 - params.omega) * params.dt);
  k.K0 = k.unitary * k.keep.cast<std::complex<double>>().asDiagonal();
  return k;
}

DensityMatrix evolve_step(const DensityMatrix& state, const KrausSet& kraus, UpdateMode mode) {
  const auto& rho = state.rho;
  if (rho.rows() != static_cast<Eigen::Index>(kraus.size())) {
    throw ParameterError("state and channel dimensions differ");
  }
  const Eigen::VectorXcd keep = kraus.keep.cast<std::complex<double>>();
  DensityMatrix next;
  if (mode == UpdateMode::eq) {
    const Eigen::VectorXd populations = rho.diagonal().real();
    next.rho.noalias() = kraus.K0 * rho * kraus.K0.adjoint();
    next.rho.diagonal().real() += kraus.Gamma * populations;
  } else {
    Eigen::MatrixXcd coherent;
    coherent.noalias() = kraus.unitary * rho * kraus.unitary.adjoint();
    const Eigen::VectorXd populations = coherent.diagonal().real();
    next.rho = keep.asDiagonal() * coherent * keep.asDiagonal();
    next.rho.diagonal().real() += kraus.Gamma * populations;
    next.rho /= next.rho.trace().real();
  }
  if (!all_finite(next.rho)) throw NumericError("evolution produced non-finite entries");
  return next;
}

Eigen::VectorXd extract_weights(const DensityMatrix& state) {
  Eigen::VectorXd w = state.rho.diagonal().real();
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericError("density matrix has no positive population");
  w /= total;
  w = w.unaryExpr([](double x) { return x < kWeightDust ? 0.0 : x; });
  return w / w.sum();
}

StationaryResult run_to_stationary(const FinancialGraph& graph, const QswParams& params,
                                   const std::optional<DensityMatrix>& initial,
                                   std::vector<TraceRow>* trace) {
  const KrausSet kraus = build_kraus(graph, params);
  DensityMatrix state = initial ? *initial : DensityMatrix::maximally_mixed(graph.size());
  if (state.size() != graph.size()) throw ParameterError("initial state has the wrong dimension");

  StationaryResult result;
  for (int it = 1; it <= params.max_iters; ++it) {
    DensityMatrix next = evolve_step(state, kraus, params.update_mode);
    result.final_delta = (next.rho - state.rho).cwiseAbs().sum();
    result.iterations = it;
    state = std::move(next);
    if (trace) {
      trace->push_back({it, result.final_delta, state.rho.trace().real(), min_eigenvalue(state.rho)});
    }
    if (result.final_delta <= params.tol) {
      result.converged = true;
      break;
    }
  }
  result.weights = extract_weights(state);
  result.rho_inf = std::move(state);
  return result;
}

void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "iteration,delta,trace,min_eigenvalue\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << csv::format(r.delta) << ',' << csv::format(r.trace) << ','
        << csv::format(r.min_eigenvalue) << '\n';
  }
  csv::write_file(path, out.str());
}

}  // namespace qsw
