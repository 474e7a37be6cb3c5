#include <doctest.h>

#include "dynreg/appendix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dynreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
// GS moments with g(0.3) = g.
MomentData gs_moments(double g, const SphericalGrid& grid) {
  return appendix_moments(make_gilbarg_serrin(2, RadialProfile::power(g / 0.3, 1.0)), 0.3, grid);
}
}  // namespace

TEST_CASE("m_infinity and jordanizer") {
  MatrixXd expect(4, 4);
  expect << -1, 0, 2, 0, 0, -1, 0, 2, 0.5, 0, -1, 0, 0, 0.5, 0, -1;
  CHECK((m_infinity(2) - expect).cwiseAbs().maxCoeff() == 0.0);

  for (int n = 2; n <= 6; ++n) {
    const MatrixXd M = m_infinity(n);
    Eigen::EigenSolver<MatrixXd> es(M);
    std::vector<double> ev;
    for (int i = 0; i < 2 * n; ++i) {
      CHECK(std::abs(es.eigenvalues()(i).imag()) <= 1e-12);
      ev.push_back(es.eigenvalues()(i).real());
    }
    std::sort(ev.begin(), ev.end());
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(ev[i] + n) <= 1e-12);
      CHECK(std::abs(ev[n + i]) <= 1e-12);
    }
    const MatrixXd D = jordanizer_inverse(n) * M * jordanizer(n);
    MatrixXd target = MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) target(n + i, n + i) = -n;
    CHECK((D - target).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((jordanizer_inverse(n) * jordanizer(n) - MatrixXd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  CHECK_THROWS_AS(m_infinity(1), DomainError);
}

TEST_CASE("block algebra in long double") {
  const auto M = m_infinity<long double>(3);
  const auto D = (jordanizer_inverse<long double>(3) * M * jordanizer<long double>(3)).eval();
  CHECK(static_cast<double>(std::abs(D(0, 0))) <= 1e-18);
  CHECK(static_cast<double>(D(5, 5)) == doctest::Approx(-3.0));
}

TEST_CASE("s1_matrix") {
  const auto grid = sphere_grid(2, 64);
  const auto id = appendix_moments(make_constant(2, Mat::Identity(2, 2)), 0.3, grid);
  CHECK(s1_matrix(id).cwiseAbs().maxCoeff() <= 1e-14);

  const auto gs = gs_moments(0.1, grid);
  const MatrixXd S1 = s1_matrix(gs);
  // A = B = 0.55 I, C = 1.05 I.
  const MatrixXd I2 = MatrixXd::Identity(2, 2);
  CHECK(S1.topLeftCorner(2, 2).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((S1.topRightCorner(2, 2) - (1.0 / 0.55 - 2.0) * I2).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((S1.bottomLeftCorner(2, 2) - (1.05 - 0.55 - 0.5) * I2).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(S1.bottomRightCorner(2, 2).cwiseAbs().maxCoeff() <= 1e-14);

  // Halving g halves |S1| to first order.
  const auto h = gs_moments(0.05, grid);
  const auto q = gs_moments(0.025, grid);
  const double r1 = s1_matrix(gs).norm() / s1_matrix(h).norm();
  const double r2 = s1_matrix(h).norm() / s1_matrix(q).norm();
  CHECK(r1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(r2 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("r1_block_residual") {
  const auto grid = sphere_grid(2, 64);
  const auto id = r1_block_residual(appendix_moments(make_constant(2, Mat::Identity(2, 2)), 0.3, grid));
  CHECK(id.R1.cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(id.residual <= 1e-14);

  std::vector<double> lg, lres;
  for (double g : {0.2, 0.1, 0.05, 0.025}) {
    const auto m = gs_moments(g, grid);
    lg.push_back(std::log(g));
    lres.push_back(std::log(r1_block_residual(m).residual));
  }
  const double slope = (lres.back() - lres.front()) / (lg.back() - lg.front());
  CHECK(slope >= 1.8);
  CHECK(slope <= 2.2);

  // C - nB against the direct spherical mean on random radii.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.01, 0.99);
  const auto f = make_perturbed_radial(2, RadialMatrix{RadialProfile::parse("r"), Mat::Identity(2, 2)},
                                       e11_perturbation(2, RadialProfile::parse("0.8*r^0.5")));
  for (int k = 0; k < 20; ++k) CHECK(r1_block_residual(appendix_moments(f, U(rng), grid)).consistency <= 1e-12);
}

TEST_CASE("transform_to_phi_psi") {
  const auto [p0, q0] = transform_to_phi_psi(VectorXd::Zero(4), 2);
  CHECK(p0.norm() == 0.0);
  CHECK(q0.norm() == 0.0);

  VectorXd e(4);
  e << 1, 0, 0, 0;
  const auto [p1, q1] = transform_to_phi_psi(jordanizer(2) * e, 2);
  CHECK((p1 - VectorXd::Unit(2, 0)).norm() <= 1e-15);
  CHECK(q1.norm() <= 1e-15);

  std::mt19937 rng(11);
  std::normal_distribution<double> N01;
  for (int k = 0; k < 10; ++k) {
    VectorXd V(6);
    for (int i = 0; i < 6; ++i) V(i) = N01(rng);
    const auto [p, q] = transform_to_phi_psi(V, 3);
    CHECK((transform_from_phi_psi(p, q, 3) - V).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("reduced_generator") {
  const auto grid = sphere_grid(2, 64);
  const auto field = make_constant(2, Mat::Identity(2, 2));
  const auto gen = reduced_generator(field, grid);
  CHECK(gen.dim == 4);
  CHECK((gen.R(3.0) - m_infinity(2)).cwiseAbs().maxCoeff() <= 1e-14);
}
