#include <doctest.h>

#include "dynreg/coeff.hpp"
#include "dynreg/quadrature.hpp"
#include "dynreg/sphmean.hpp"

#include <cmath>

using namespace dynreg;

namespace {
double max_entry(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// a11 = 1 + g theta1^2 with g(0.5) = 0.4.
CoefficientField e11_field() {
  return make_perturbed_radial(2, RadialMatrix{RadialProfile::zero(), Mat::Identity(2, 2)},
                               e11_perturbation(2, RadialProfile::parse("0.8*r")));
}
}  // namespace

TEST_CASE("sphere_grid") {
  const auto g = sphere_grid(2, 16);
  REQUIRE(g.nodes.size() == 16);
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(g.weights[k] == doctest::Approx(1.0 / 16.0));
    CHECK(std::atan2(g.nodes[k](1), g.nodes[k](0)) ==
          doctest::Approx(std::remainder(2.0 * M_PI * double(k) / 16.0, 2.0 * M_PI)));
  }
  for (int M : {4, 5, 16, 97}) {
    const auto c = sphere_grid(2, M);
    double m = 0.0;
    for (std::size_t k = 0; k < c.nodes.size(); ++k) m += c.weights[k] * c.nodes[k](0) * c.nodes[k](0);
    CHECK(std::abs(m - 0.5) <= 1e-14);
  }
  const auto s = sphere_grid(3, 24);
  double m12 = 0.0, total = 0.0;
  for (std::size_t k = 0; k < s.nodes.size(); ++k) {
    m12 += s.weights[k] * s.nodes[k](0) * s.nodes[k](1);
    total += s.weights[k];
  }
  CHECK(std::abs(m12) <= 1e-13);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mean_matrix_R") {
  const auto grid = sphere_grid(2, 64);
  Mat A0(2, 2);
  A0 << 2.0, 0.3, 0.3, 1.0;
  for (double r : {0.9, 0.1, 1e-5}) CHECK(max_entry(mean_matrix_R(make_constant(2, A0), r, grid)) <= 1e-14);

  // GS with g(0.25) = 0.3.
  const auto gs = make_gilbarg_serrin(2, RadialProfile::parse("1.2*r"));
  const Mat R = mean_matrix_R(gs, 0.25, grid);
  CHECK(max_entry(R + 0.15 * Mat::Identity(2, 2)) <= 1e-14);

  // Frozen M = 4096 dense quadrature oracle (tests/oracles/dense_quadrature.py).
  Mat oracle = Mat::Zero(2, 2);
  oracle(0, 0) = -0.1;
  CHECK(max_entry(mean_matrix_R(e11_field(), 0.5, grid) - oracle) <= 1e-13);
}

TEST_CASE("symmetrized_S and mu") {
  CHECK(max_entry(symmetrized_S(Mat(Mat::Zero(2, 2)))) == 0.0);
  const Mat R = -0.15 * Mat::Identity(2, 2);
  const Mat S = symmetrized_S(R);
  CHECK(max_entry(S - 0.15 * Mat::Identity(2, 2)) <= 1e-15);
  CHECK(mu_max(S) == doctest::Approx(0.15));
  Mat skew(2, 2);
  skew << 0.0, 1.0, -1.0, 0.0;
  CHECK(max_entry(symmetrized_S(skew)) == 0.0);
  CHECK(mu_max(symmetrized_S(skew)) == doctest::Approx(0.0));
}

TEST_CASE("appendix_moments") {
  const auto grid = sphere_grid(2, 64);
  const auto id = appendix_moments(make_constant(2, Mat::Identity(2, 2)), 0.3, grid);
  CHECK(id.alpha == doctest::Approx(1.0));
  CHECK(id.beta.norm() <= 1e-15);
  CHECK(id.gamma.norm() <= 1e-15);
  CHECK(max_entry(id.Amat - 0.5 * Mat::Identity(2, 2)) <= 1e-15);
  CHECK(max_entry(id.Bmat - 0.5 * Mat::Identity(2, 2)) <= 1e-15);
  CHECK(max_entry(id.Cmat - Mat::Identity(2, 2)) <= 1e-15);

  const auto gs = appendix_moments(make_gilbarg_serrin(2, RadialProfile::parse("r")), 0.3, grid);
  CHECK(gs.alpha == doctest::Approx(1.3));
  CHECK(max_entry(gs.Amat - 0.65 * Mat::Identity(2, 2)) <= 1e-14);
  CHECK(max_entry(gs.Bmat - 0.65 * Mat::Identity(2, 2)) <= 1e-14);
  CHECK(max_entry(gs.Cmat - 1.15 * Mat::Identity(2, 2)) <= 1e-14);

  // Frozen M = 4096 oracle for the non-radial test field.
  const auto m = appendix_moments(e11_field(), 0.5, grid);
  CHECK(m.alpha == doctest::Approx(1.15).epsilon(1e-14));
  CHECK(m.beta.norm() <= 1e-14);
  CHECK(m.gamma.norm() <= 1e-14);
  Mat A = Mat::Zero(2, 2), B = Mat::Zero(2, 2), C = Mat::Zero(2, 2);
  A.diagonal() << 0.625, 0.525;
  B.diagonal() << 0.65, 0.5;
  C.diagonal() << 1.2, 1.0;
  CHECK(max_entry(m.Amat - A) <= 1e-14);
  CHECK(max_entry(m.Bmat - B) <= 1e-14);
  CHECK(max_entry(m.Cmat - C) <= 1e-14);
  CHECK(moment_consistency(e11_field(), 0.5, grid) <= 1e-14);
}

TEST_CASE("orthogonality_check") {
  const auto grid = sphere_grid(2, 64);
  auto f = [](const Vec& x) { return x(0) * x(1); };
  auto gf = [](const Vec& x) { return Vec((Vec(2) << x(1), x(0)).finished()); };
  const auto a = orthogonality_check(f, gf, 0.4, grid, OrthogonalityHypothesis::FirstMomentZero);
  CHECK(a.residual_mean <= 1e-13);
  CHECK(a.residual_moment <= 1e-13);
  CHECK_FALSE(a.hypothesis_violated);

  auto one = [](const Vec&) { return 1.0; };
  auto zero = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  const auto b = orthogonality_check(one, zero, 0.4, grid, OrthogonalityHypothesis::MeanZero);
  CHECK(b.hypothesis_violated);
  CHECK_FALSE(b.diagnostic.empty());

  auto q = [](const Vec& x) { return x(0) * x(0) - x.squaredNorm() / 2.0; };
  auto gq = [](const Vec& x) { return Vec((Vec(2) << x(0), -x(1)).finished()); };
  const auto c = orthogonality_check(q, gq, 0.4, grid, OrthogonalityHypothesis::MeanZero);
  CHECK(c.residual_mean <= 1e-13);
  CHECK_FALSE(c.hypothesis_violated);
}
