#include <doctest.h>

#include "dynreg/profile.hpp"
#include "dynreg/types.hpp"

#include <cmath>
#include <limits>

using namespace dynreg;

TEST_CASE("profile parses the whitelist and evaluates in log-time") {
  const auto p = RadialProfile::parse("1/log(e/r)");
  CHECK(p.at_t(3.0) == doctest::Approx(0.25));
  CHECK(p.at_r(std::exp(-3.0)) == doctest::Approx(0.25));
  CHECK(p.limit_at_origin() == 0.0);

  const auto q = RadialProfile::parse("0.8*r^0.5");
  CHECK(q.at_r(0.25) == doctest::Approx(0.4));

  const auto c = RadialProfile::parse("-2");
  CHECK(c.at_t(10.0) == -2.0);

  const auto sq = RadialProfile::parse("-1/log(e^2/r)^2");
  CHECK(sq.at_t(1.0) == doctest::Approx(-1.0 / 9.0));
}

TEST_CASE("profile sums and round trip through describe") {
  const auto p = RadialProfile::parse("r^0.5 + 0.1/log(e/r)");
  CHECK(p.at_t(0.0) == doctest::Approx(1.1));
  const auto back = RadialProfile::parse(p.describe());
  for (double t : {0.0, 1.0, 7.5, 40.0}) CHECK(back.at_t(t) == doctest::Approx(p.at_t(t)).epsilon(1e-14));
}

TEST_CASE("profile exact integrals in t") {
  CHECK(RadialProfile::power(1.0, 1.0).integral_t(0.0, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0));
  CHECK(RadialProfile::inv_log(1.0, 1.0, 2.0).integral_t(0.0, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(1.0));
  CHECK(std::isinf(RadialProfile::inv_log(1.0).integral_t(0.0, std::numeric_limits<double>::infinity())));
  const auto pw = RadialProfile::piecewise({1.0, 2.0}, {0.0, 3.0, 0.0});
  CHECK(pw.integral_t(0.0, 10.0) == doctest::Approx(3.0));
  CHECK(pw.breakpoints(0.0, 10.0).size() == 2);
}

TEST_CASE("profile rejects terms outside the whitelist") {
  CHECK_THROWS_AS(RadialProfile::parse("sin(r)"), DomainError);
  CHECK_THROWS_AS(RadialProfile::parse("1/log(e^-1/r)"), DomainError);
}
