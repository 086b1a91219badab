#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trigf/quadrature.hpp"

using namespace trigf;

TEST_CASE("polynomial and transcendental integrands") {
  CHECK(integrate([](double x) { return x * x; }, 0, 1).value ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::exp(x); }, 0, 1).value ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(integrate([](double x) { return std::sin(x); }, 0, M_PI).value ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("integrable endpoint singularity") {
  auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0, 1, 1e-10, 1e-10);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("oscillatory integrand") {
  auto r = integrate([](double x) { return std::sin(50.0 * x); }, 0, 1);
  CHECK(r.value == doctest::Approx((1.0 - std::cos(50.0)) / 50.0).epsilon(1e-10));
}

TEST_CASE("interval budget exhaustion throws with achieved tolerance") {
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0, 1,
                            1e-14, 1e-14, 8),
                  QuadratureError);
}
