#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qsw/classical.hpp"
#include "qsw/engine.hpp"
#include "qsw/error.hpp"

using namespace qsw;

namespace {

const std::complex<double> I(0.0, 1.0);

FinancialGraph fixture_graph(std::size_t n, std::uint64_t seed, QswParams p = {}) {
  return build_graph(oracle::random_stats(n, seed), p);
}

}  // namespace

TEST_CASE("hermitian unitary") {
  const Eigen::MatrixXd H = oracle::random_stats(6, 3).cov * 1e4;
  CHECK(hermitian_unitary(H, 0.0) == Eigen::MatrixXcd::Identity(6, 6));

  Eigen::Matrix2d D;
  D << 1.5, 0, 0, -0.25;
  const Eigen::MatrixXcd U = hermitian_unitary(D, 0.3);
  CHECK(std::abs(U(0, 0) - std::exp(-I * 0.3 * 1.5)) < 1e-15);
  CHECK(std::abs(U(1, 1) - std::exp(-I * 0.3 * -0.25)) < 1e-15);
  CHECK(std::abs(U(0, 1)) < 1e-15);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  Eigen::MatrixXd R(6, 6);
  for (Eigen::Index i = 0; i < 36; ++i) R(i) = z(rng);
  const Eigen::MatrixXd S = R + R.transpose();
  const Eigen::MatrixXcd V = hermitian_unitary(S, 0.7);
  CHECK(oracle::max_abs(V.adjoint() * V - Eigen::MatrixXcd::Identity(6, 6)) < 1e-10);
  // Agreement with the Pade-based matrix exponential.
  const Eigen::MatrixXcd ref = (Eigen::MatrixXcd(-I * 0.7 * S.cast<std::complex<double>>())).exp();
  CHECK(oracle::max_abs(V - ref) < 1e-12);

  CHECK_THROWS(hermitian_unitary(R, 0.1));
}

TEST_CASE("kraus limits and completeness") {
  QswParams p;
  p.omega = 0.0;
  FinancialGraph g = fixture_graph(7, 2, p);
  KrausSet k = build_kraus(g, p);
  CHECK(k.Gamma.cwiseAbs().maxCoeff() == 0.0);
  CHECK(k.decay.cwiseAbs().maxCoeff() == 0.0);
  CHECK(oracle::max_abs(k.K0.adjoint() * k.K0 - Eigen::MatrixXcd::Identity(7, 7)) < 1e-12);

  p.omega = 1.0;
  k = build_kraus(g, p);
  CHECK(k.K0.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK(oracle::max_abs(k.K0.real() - Eigen::MatrixXd(k.keep.asDiagonal())) < 1e-15);

  for (double omega : {0.2, 0.5, 0.9}) {
    p.omega = omega;
    k = build_kraus(g, p);
    const Eigen::MatrixXcd sum = k.K0.adjoint() * k.K0 + Eigen::MatrixXcd(k.decay.cast<std::complex<double>>().asDiagonal());
    CHECK(oracle::max_abs(sum - Eigen::MatrixXcd::Identity(7, 7)) < 1e-12);
    CHECK(k.Gamma.minCoeff() >= 0.0);
    CHECK(k.Gamma.maxCoeff() < 1.0);
    CHECK(oracle::max_abs(k.decay - k.Gamma.colwise().sum().transpose()) < 1e-15);
  }
}

TEST_CASE("jump probabilities follow the small-step series") {
  QswParams p;
  p.omega = 0.7;
  p.dt = 1e-6;
  const FinancialGraph g = fixture_graph(6, 5, p);
  const KrausSet k = build_kraus(g, p);
  const Eigen::MatrixXd linear = p.omega * p.dt * g.G;
  // 1 - e^{-x} = x - x^2/2 + O(x^3)
  CHECK(oracle::max_abs(k.Gamma - linear) < 1e-12);
  const Eigen::MatrixXd second = linear - 0.5 * linear.cwiseProduct(linear);
  CHECK(oracle::max_abs(k.Gamma - second) < 1e-18);
}

TEST_CASE("oversized time step is rejected") {
  QswParams p;
  p.omega = 1.0;
  p.dt = 50.0;
  const FinancialGraph g = fixture_graph(4, 8, p);
  CHECK_THROWS_WITH_AS(build_kraus(g, p), doctest::Contains("time step too large"), NumericError);
}

TEST_CASE("coherent limit is pure unitary conjugation") {
  QswParams p;
  p.omega = 0.0;
  const FinancialGraph g = fixture_graph(5, 4, p);
  const KrausSet k = build_kraus(g, p);
  std::mt19937_64 rng(1);
  DensityMatrix rho{oracle::random_density(5, rng)};
  const Eigen::MatrixXcd expected = k.unitary * rho.rho * k.unitary.adjoint();
  for (UpdateMode mode : {UpdateMode::eq, UpdateMode::alg}) {
    const DensityMatrix next = evolve_step(rho, k, mode);
    CHECK(oracle::max_abs(next.rho - expected) < 1e-13);
    CHECK(std::abs(next.rho.trace() - 1.0) < 1e-13);
  }
}

TEST_CASE("eq mode preserves trace exactly") {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    QswParams p;
    p.omega = 0.1 + 0.08 * static_cast<double>(seed);
    const FinancialGraph g = fixture_graph(4 + seed, 30 + seed, p);
    const KrausSet k = build_kraus(g, p);
    const DensityMatrix rho{oracle::random_density(g.size(), rng)};
    const Eigen::MatrixXcd coh = k.K0 * rho.rho * k.K0.adjoint();
    const double jumps = k.Gamma.colwise().sum().dot(rho.rho.diagonal().real());
    CHECK(std::abs(coh.trace().real() + jumps - 1.0) < 1e-12);
    CHECK(std::abs(evolve_step(rho, k, UpdateMode::eq).rho.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("single node is a fixed point") {
  AssetStats s;
  s.mu = Eigen::VectorXd::Constant(1, 0.001);
  s.sigma = Eigen::VectorXd::Constant(1, 0.01);
  s.sr = Eigen::VectorXd::Constant(1, 0.1);
  s.cov = Eigen::MatrixXd::Constant(1, 1, 1e-4);
  QswParams p;
  const KrausSet k = build_kraus(build_graph(s, p), p);
  const DensityMatrix one = DensityMatrix::maximally_mixed(1);
  for (UpdateMode mode : {UpdateMode::eq, UpdateMode::alg}) {
    CHECK(std::abs(evolve_step(one, k, mode).rho(0, 0) - 1.0) < 1e-15);
  }
}

TEST_CASE("weight extraction") {
  DensityMatrix d{Eigen::MatrixXcd::Zero(3, 3)};
  d.rho.diagonal() << 0.2, 0.3, 0.5;
  const Eigen::VectorXd w = extract_weights(d);
  CHECK(w(0) == doctest::Approx(0.2));
  CHECK(w(2) == doctest::Approx(0.5));

  DensityMatrix e{Eigen::MatrixXcd::Zero(2, 2)};
  e.rho.diagonal() << 2.0, 2.0;
  CHECK(extract_weights(e)(0) == 0.5);

  DensityMatrix dust{Eigen::MatrixXcd::Zero(2, 2)};
  dust.rho.diagonal() << 1.0, -1e-14;
  CHECK(extract_weights(dust)(1) == 0.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXd v = extract_weights(DensityMatrix{oracle::random_density(9, rng)});
    CHECK(v.minCoeff() >= 0.0);
    CHECK(std::abs(v.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(DensityMatrix::maximally_mixed(4).validate());
  DensityMatrix bad = DensityMatrix::maximally_mixed(2);
  bad.rho(0, 0) = 2.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("identical assets split evenly") {
  AssetStats s;
  s.mu = Eigen::Vector2d::Constant(0.001);
  s.sigma = Eigen::Vector2d::Constant(0.01);
  s.sr = Eigen::Vector2d::Constant(0.1);
  s.cov.resize(2, 2);
  s.cov << 1e-4, 3e-5, 3e-5, 1e-4;
  QswParams p;
  const StationaryResult r = run_to_stationary(build_graph(s, p), p);
  CHECK(r.converged);
  CHECK(r.weights(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(QswParams{}.tol == 1e-8);
  CHECK(QswParams{}.max_iters == 5000);
  CHECK(QswParams{}.dt == 0.1);
}

TEST_CASE("classical limit equals the discretized rate chain") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    QswParams p;
    p.omega = 1.0;
    p.alpha = 5;
    p.beta = 5;
    p.lambda_hold = 5;
    const FinancialGraph g = fixture_graph(6 + seed, 60 + seed, p);
    const Eigen::VectorXd pi = classical_stationary(build_kraus(g, p).Gamma);
    for (UpdateMode mode : {UpdateMode::eq, UpdateMode::alg}) {
      p.update_mode = mode;
      const StationaryResult r = run_to_stationary(g, p);
      CHECK(r.converged);
      CHECK((r.weights - pi).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("stationary state does not depend on the initial state") {
  std::mt19937_64 rng(77);
  for (double omega : {0.3, 0.8}) {
    QswParams p;
    p.omega = omega;
    p.alpha = 10;
    const FinancialGraph g = fixture_graph(8, 90, p);
    const StationaryResult a = run_to_stationary(g, p);
    const StationaryResult b = run_to_stationary(g, p, DensityMatrix{oracle::random_density(8, rng)});
    CHECK(a.converged);
    CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_NOTHROW(a.rho_inf.validate());
  }
}

TEST_CASE("trace log has one row per iteration") {
  QswParams p;
  p.omega = 0.5;
  std::vector<TraceRow> rows;
  const StationaryResult r = run_to_stationary(fixture_graph(5, 1, p), p, std::nullopt, &rows);
  CHECK(rows.size() == static_cast<std::size_t>(r.iterations));
  CHECK(rows.back().delta == r.final_delta);
  CHECK(rows.back().min_eigenvalue > -1e-8);
}

TEST_CASE("permuting assets permutes the weights") {
  const AssetStats s = oracle::random_stats(6, 12);
  const std::vector<Eigen::Index> perm{3, 0, 5, 1, 4, 2};
  AssetStats t = s;
  for (Eigen::Index i = 0; i < 6; ++i) {
    t.mu(i) = s.mu(perm[i]);
    t.sigma(i) = s.sigma(perm[i]);
    t.sr(i) = s.sr(perm[i]);
    for (Eigen::Index j = 0; j < 6; ++j) t.cov(i, j) = s.cov(perm[i], perm[j]);
  }
  QswParams p;
  p.omega = 0.4;
  const Eigen::VectorXd a = run_to_stationary(build_graph(s, p), p).weights;
  const Eigen::VectorXd b = run_to_stationary(build_graph(t, p), p).weights;
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(b(i) - a(perm[i])) < 1e-9);
}
