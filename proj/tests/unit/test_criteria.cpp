#include <doctest.h>

#include "dynreg/criteria.hpp"

#include <cmath>

using namespace dynreg;

namespace {
CoefficientField gs(const char* g, int n = 2) { return make_gilbarg_serrin(n, RadialProfile::parse(g)); }
CoefficientField identity(int n = 2) { return make_constant(n, Mat::Identity(n, n)); }
CoefficientField radial() { return make_radial(2, RadialMatrix{RadialProfile::parse("r"), Mat::Identity(2, 2)}); }
}  // namespace

TEST_CASE("checkpoints") {
  const auto c = checkpoints(0.0, 10, 1e4);
  CHECK(c.edges.front() == 0.0);
  CHECK(c.edges[c.first_geometric] == doctest::Approx(10.0 * std::log(2.0)));
  CHECK(c.edges.back() <= 1e4);
  CHECK(2.0 * c.edges.back() > 1e4);
  for (std::size_t i = 1; i < c.edges.size(); ++i) CHECK(c.edges[i] > c.edges[i - 1]);
}

TEST_CASE("dini_integral") {
  const auto a = dini_integral(Modulus::parse("r^0.5"), 1.0, 1e-8);
  CHECK(a.verdict == ConvergenceVerdict::Converges);
  CHECK(a.value() == doctest::Approx(2.0).epsilon(1e-8));

  const auto b = dini_integral(Modulus::parse("1/log(e/r)"), 1.0, 1e-8);
  CHECK(b.verdict == ConvergenceVerdict::Diverges);
  CHECK(b.rate == DivergenceRate::Log);

  const auto z = dini_integral(Modulus::zero(), 1.0, 1e-8);
  CHECK(z.converges());
  CHECK(z.value() == 0.0);
}

TEST_CASE("square_dini_integral") {
  const auto a = square_dini_integral(Modulus::parse("1/log(e/r)"), 1e-8);
  CHECK(a.converges());
  CHECK(std::abs(a.value() - 1.0) <= 1e-6);
  for (double p : {0.25, 0.5, 1.0}) {
    const auto s = square_dini_integral(Modulus::from_profile(RadialProfile::power(1.0, p)), 1e-10);
    CHECK(s.converges());
    CHECK(std::abs(s.value() - 1.0 / (2.0 * p)) <= 1e-8);
  }
  const auto c = square_dini_integral(Modulus::parse("0.3"), 1e-8);
  CHECK(c.verdict == ConvergenceVerdict::Diverges);
  CHECK(c.rate == DivergenceRate::Log);
}

TEST_CASE("window condition integrals") {
  const Budget b;
  const auto grid = b.grid(2);
  CHECK(mu_window_integral(identity(), 0.01, 0.5, grid, 1e-10) == 0.0);

  const auto neg = gs("-1/log(e^2/r)");
  const double w = mu_window_integral(neg, 0.01, 0.5, grid, 1e-10);
  // mu = g/2, int_{r1}^{r2} -1/(2 rho log(e^2/rho)) = -(1/2) log(log(e^2/r1)/log(e^2/r2))
  CHECK(w == doctest::Approx(-0.5 * std::log((2.0 - std::log(0.01)) / (2.0 - std::log(0.5)))).epsilon(1e-8));
  const auto cn = check_window_condition(RadialCache(neg, b), b);
  CHECK(cn.converges());
  CHECK(cn.value() <= 1e-12);

  const auto cp = check_window_condition(RadialCache(gs("1/log(e/r)"), b), b);
  CHECK(cp.verdict == ConvergenceVerdict::Diverges);
}

TEST_CASE("pv_integral_R, L1 norm and iterated integrals") {
  const Budget b;
  const auto rad = pv_integral_R(RadialCache(radial(), b), b);
  CHECK(rad.converges());
  CHECK(rad.limit.cwiseAbs().maxCoeff() <= 1e-15);

  // g = 1/log(e/r)^2 from t_lo = log 2: R = -(1/2)(1+t)^-2 I, int_t^inf R = -(1/2)(1+t)^-1 I.
  const double L = 1.0 + std::log(2.0);
  const RadialCache cache(gs("1/log(e/r)^2"), b);
  const auto pv = pv_integral_R(cache, b);
  CHECK(pv.converges());
  CHECK((pv.limit + 0.5 / L * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-7);

  // |R(t) int_t^inf R| = (1/4)(1+t)^-3.
  const auto l1 = l1_norm_condition(cache, b);
  CHECK(l1.converges());
  CHECK(l1.value() == doctest::Approx(0.125 / (L * L)).epsilon(1e-7));

  // Level 2: int R(s) I(s) = (1/8)(1+t)^-2, then |R(t) (1/8)(1+t)^-2| integrates to (1/48)(1+t_lo)^-3.
  const auto it = iterated_condition(cache, b);
  CHECK(it.level1_a.converges());
  CHECK(it.level1_b.converges());
  CHECK(it.level2_a.converges());
  CHECK(it.level2_b.converges());
  CHECK(std::abs(it.level2_a.limit(0, 0) - 0.125 / (L * L)) <= 1e-7);
  CHECK(std::abs(it.level2_b.value() - 1.0 / (48.0 * L * L * L)) <= 1e-7);

  const auto lp = l1_norm_condition(RadialCache(gs("1/log(e/r)"), b), b);
  CHECK_FALSE(lp.converges());

  const auto rit = iterated_condition(RadialCache(radial(), b), b);
  CHECK(rit.level2_a.converges());
  CHECK(rit.level2_b.converges());
}

TEST_CASE("pv_integral_R oscillates for alternating blocks") {
  const Budget b;
  const auto osc = pv_integral_R(RadialCache(gs("altlog(0.3,2,2)"), b), b);
  CHECK(osc.verdict == ConvergenceVerdict::Oscillates);
  const auto it = iterated_condition(RadialCache(gs("altlog(0.3,2,2)"), b), b);
  CHECK_FALSE(it.level2_a.converges());
}

TEST_CASE("divergence_condition") {
  const Budget b;
  const auto neg = divergence_condition(RadialCache(gs("-1/log(e^2/r)"), b), b);
  CHECK(neg.verdict == ConvergenceVerdict::Diverges);
  CHECK(neg.rate == DivergenceRate::ToMinusInfinity);
  const auto pos = divergence_condition(RadialCache(gs("1/log(e/r)"), b), b);
  CHECK(pos.rate != DivergenceRate::ToMinusInfinity);
  const auto id = divergence_condition(RadialCache(identity(), b), b);
  CHECK(id.converges());
  CHECK(id.value() == 0.0);
}

TEST_CASE("volume_integral_form") {
  Budget b;
  CHECK(volume_integral_form(radial(), 0.5, b).limit.cwiseAbs().maxCoeff() <= 1e-12);
  Mat A0(2, 2);
  A0 << 2.0, 0.3, 0.3, 1.0;
  CHECK(volume_integral_form(make_constant(2, A0), 0.5, b).limit.cwiseAbs().maxCoeff() <= 1e-12);

  // Over |x| < 1/2: sphere area times the pv integral from the same radius.
  const auto f = gs("r^0.5");
  const auto v = volume_integral_form(f, 0.5, b);
  CHECK(v.converges());
  const auto pv = pv_integral_R(RadialCache(f, b), b);
  CHECK(pv.limit(0, 0) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-9));
  CHECK(std::abs(v.limit(0, 0) - sphere_area(2) * pv.limit(0, 0)) <= 10.0 * b.tol);
  CHECK(sphere_area(3) == doctest::Approx(4.0 * M_PI));
}

TEST_CASE("condition_A_minus_I") {
  const Budget b;
  const auto pw = condition_A_minus_I(gs("r^0.5"), b);
  CHECK(pw.converges());
  const auto lg = condition_A_minus_I(gs("1/log(e/r)"), b);
  CHECK(lg.verdict == ConvergenceVerdict::Diverges);
  CHECK(lg.rate == DivergenceRate::Log);
  const auto id = condition_A_minus_I(identity(), b);
  CHECK(id.converges());
  CHECK(id.value() == 0.0);
}

TEST_CASE("classify") {
  const auto id = classify(identity(), Budget{}, false);
  CHECK(id.classification == Classification::DifferentiableAtOrigin);

  const auto neg = classify(gs("-1/log(e^2/r)"), Budget{}, false);
  CHECK(neg.classification == Classification::DifferentiableWithZeroGradient);
  CHECK(neg.route == Route::MuDivergence);

  const auto pos = classify(gs("1/log(e/r)"), Budget{}, true);
  CHECK(pos.classification == Classification::Inconclusive);
  REQUIRE(pos.dynamics.has_value());
  CHECK(pos.dynamics->stability.verdict_uniform_stability == StabilityVerdict::EvidenceUnstable);
}
