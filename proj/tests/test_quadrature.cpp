#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "svol/quadrature.hpp"

using namespace svol::quad;

TEST_CASE("linear integrator on closed forms") {
  auto r = integrate([](double x) { return x * x; }, 0.0, 3.0);
  CHECK(r.value == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(r.converged);

  r = integrate([](double x) { return std::exp(-x); }, 0.0, 40.0);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-10));

  // mildly oscillatory
  r = integrate([](double x) { return std::sin(10.0 * x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx((1.0 - std::cos(10.0 * M_PI)) / 10.0).epsilon(1e-10));

  // orientation
  r = integrate([](double x) { return x; }, 2.0, 0.0);
  CHECK(r.value == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("log-domain integrator handles extreme scales") {
  // integral of exp(a) over [0,1] = e^a; a far outside double range
  for (double a : {-5000.0, -100.0, 0.0, 100.0, 5000.0}) {
    auto r = integrate_exp([a](double) { return a; }, 0.0, 1.0, 1e-12);
    CHECK(r.log_value == doctest::Approx(a).epsilon(1e-12));
    CHECK(r.converged);
  }

  // integral of exp(-k x) over [0, 10]: log((1 - e^{-10k})/k)
  const double k = 700.0;
  auto r = integrate_exp([k](double x) { return -k * x; }, 0.0, 10.0, 1e-10);
  CHECK(r.log_value == doctest::Approx(-std::log(k)).epsilon(1e-9));

  // sharply peaked integrand: exp(k x) over [0, 1] = e^k / k (approx)
  auto r2 = integrate_exp([](double x) { return 2000.0 * x; }, 0.0, 1.0, 1e-10);
  CHECK(r2.log_value == doctest::Approx(2000.0 - std::log(2000.0)).epsilon(1e-9));

  // zero integrand
  auto r3 = integrate_exp(
      [](double) { return -std::numeric_limits<double>::infinity(); }, 0.0, 1.0);
  CHECK(r3.log_value == -std::numeric_limits<double>::infinity());
}

TEST_CASE("cumulative integral is additive and memoized") {
  Cumulative F([](double x) { return 1.0 / x; }, 1.0);
  CHECK(F(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(F(std::exp(2.0)) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(F(0.5) == doctest::Approx(std::log(0.5)).epsilon(1e-10));
  // repeated queries return the memoized value exactly
  const double a = F(2.7);
  CHECK(F(2.7) == a);
}

TEST_CASE("log-cumulative matches closed form in both directions") {
  // integrand x^3: int_1^x = (x^4-1)/4
  LogCumulative L([](double x) { return 3.0 * std::log(x); }, 1.0);
  CHECK(std::exp(L.log_abs(2.0)) == doctest::Approx(15.0 / 4.0).epsilon(1e-9));
  CHECK(std::exp(L.log_abs(0.5)) == doctest::Approx((1.0 - 1.0 / 16.0) / 4.0).epsilon(1e-9));
  // huge scales stay in log domain: integrand e^{100 x}
  LogCumulative H([](double x) { return 100.0 * x; }, 1.0);
  const double expect = 100.0 * 50.0 - std::log(100.0);   // ~ e^{5000}/100
  CHECK(H.log_abs(50.0) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("non-convergence raises with the offending interval") {
  // integrable but endpoint-singular: 1/sqrt(x) on [0,1] converges fine;
  // a genuinely divergent integrand must throw
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-12, 1e-10, 50),
                  QuadratureError);
}
