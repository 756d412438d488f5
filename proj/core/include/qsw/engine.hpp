#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qsw/graph.hpp"

namespace qsw {

/// Complex Hermitian, unit-trace, positive semidefinite state of the walk.
struct DensityMatrix {
  Eigen::MatrixXcd rho;

  std::size_t size() const { return static_cast<std::size_t>(rho.rows()); }

  /// I / n.
  static DensityMatrix maximally_mixed(std::size_t n);
  /// Throws ParameterError unless rho is square, Hermitian to 1e-10, unit trace to 1e-10
  /// and has no eigenvalue below -1e-8.
  void validate() const;
};

/// Discretized channel for one time step.
/// Jump operators K_ij = gamma_ij |i><j| act through Gamma; the no-jump operator is
/// K0 = U diag(sqrt(1 - decay)) with U = exp(-i (1 - omega) H dt).
struct KrausSet {
  Eigen::MatrixXcd K0;
  Eigen::MatrixXcd unitary;  // U
  Eigen::VectorXd keep;      // sqrt(1 - decay)
  Eigen::MatrixXd Gamma;     // gamma_ij^2 = 1 - exp(-omega G_ij dt)
  Eigen::VectorXd decay;     // column sums of Gamma, each < 1

  std::size_t size() const { return static_cast<std::size_t>(Gamma.rows()); }
};

struct StationaryResult {
  DensityMatrix rho_inf;
  Eigen::VectorXd weights;
  int iterations = 0;
  bool converged = false;
  double final_delta = 0.0;
};

/// One row of the optional per-iteration diagnostics log.
struct TraceRow {
  int iteration = 0;
  double delta = 0.0;
  double trace = 0.0;
  double min_eigenvalue = 0.0;
};

/// exp(-i s H) for real symmetric H via its eigendecomposition.
Eigen::MatrixXcd hermitian_unitary(const Eigen::MatrixXd& H, double s);

/// Throws NumericError("time step too large; reduce dt") if any decay reaches 1.
KrausSet build_kraus(const FinancialGraph& graph, const QswParams& params);

DensityMatrix evolve_step(const DensityMatrix& state, const KrausSet& kraus, UpdateMode mode);

/// Populations normalized onto the simplex (real part, dust below 1e-12 clamped to 0).
Eigen::VectorXd extract_weights(const DensityMatrix& state);

/// Iterates from `initial` (I/n when empty) until the entrywise 1-norm of the step
/// difference drops to params.tol or params.max_iters is reached. With a non-null `trace`
/// one TraceRow is appended per iteration.
StationaryResult run_to_stationary(const FinancialGraph& graph, const QswParams& params,
                                   const std::optional<DensityMatrix>& initial = std::nullopt,
                                   std::vector<TraceRow>* trace = nullptr);

void write_trace_csv(const std::vector<TraceRow>& rows, const std::filesystem::path& path);

}  // namespace qsw
