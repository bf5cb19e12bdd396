#include <cmath>

#include "doctest.h"
#include "gyrad/asymptotics.hpp"
#include "gyrad/errors.hpp"
#include "gyrad/quadrature.hpp"

using namespace gyrad;
namespace as = gyrad::asympt;

TEST_CASE("quadrature integrates polynomials and sine exactly enough") {
  auto r1 = quad::integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-13, 0.0);
  CHECK(r1.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  auto r2 = quad::integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-13, 0.0);
  CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-13));
  auto r3 = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                            1e-10, 0.0, 20000);
  CHECK(r3.value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("gamma function hits known values") {
  CHECK(as::gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(as::gamma_fn(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(as::gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-13));
  // Gamma(11.5) via the product recursion from Gamma(1.5).
  double expect = as::gamma_fn(1.5);
  for (double x = 1.5; x < 11.0; x += 1.0) expect *= x;
  CHECK(as::gamma_fn(11.5) == doctest::Approx(expect).epsilon(1e-12));
  // Reflection-free negative extension.
  CHECK(as::gamma_fn(-0.5) == doctest::Approx(-2.0 * std::sqrt(M_PI)).epsilon(1e-12));
  CHECK_THROWS_AS(as::gamma_fn(0.0), invalid_parameter);
  // Relative accuracy across the contract range against std::tgamma.
  for (double x = 0.1; x <= 50.0; x += 0.7) {
    CHECK(std::abs(as::gamma_fn(x) - std::tgamma(x)) / std::tgamma(x) < 1e-12);
  }
}

TEST_CASE("sphere surface areas") {
  CHECK(as::sphere_surface(1) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(as::sphere_surface(2) == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
  CHECK(as::sphere_surface(3) == doctest::Approx(4.0 * M_PI).epsilon(1e-13));
}

TEST_CASE("K_r closed form: known values") {
  CHECK(as::K_r_closed(1.0) == doctest::Approx(M_PI / 2.0).epsilon(1e-13));
  // K_{1/2} = pi / (2 Gamma(3/2) sin(pi/4)) = sqrt(2 pi).
  CHECK(as::K_r_closed(0.5) == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK_THROWS_AS(as::K_r_closed(0.0), invalid_parameter);
  CHECK_THROWS_AS(as::K_r_closed(2.0), invalid_parameter);
}

TEST_CASE("K_r quadrature agrees with the closed form") {
  for (double r : {0.05, 0.1, 0.5, 1.0, 1.5, 1.9}) {
    const double qc = as::K_r_quadrature(r);
    const double cf = as::K_r_closed(r);
    CHECK(std::abs(qc - cf) / cf < 1e-8);
  }
  CHECK(std::abs(as::K_r_quadrature(1.0) - M_PI / 2.0) < 1e-10);
}

TEST_CASE("pi/K_r identity") {
  for (double r : {0.3, 0.7, 1.2, 1.8}) {
    const double lhs = M_PI / as::K_r_quadrature(r);
    const double rhs = 2.0 * as::gamma_fn(r + 1.0) * std::sin(0.5 * r * M_PI);
    CHECK(std::abs(lhs - rhs) / rhs < 1e-8);
  }
}

TEST_CASE("prefactor forms agree where both are defined") {
  // 2 sin(r pi/(a v 2)) / ((a ^ 2) sin(r pi / a)) equals
  // 2 sin(r pi/2) / ((a ^ 2) sin(r pi/(a ^ 2))) on 0 < r < a ^ 2.
  for (double alpha : {1.5, 3.0}) {
    const double a2 = std::min(alpha, 2.0);
    for (int i = 1; i <= 20; ++i) {
      const double r = a2 * i / 21.0;
      const double av2 = std::max(alpha, 2.0);
      const double raw =
          2.0 * std::sin(r * M_PI / av2) / (a2 * std::sin(r * M_PI / alpha));
      const double alt =
          2.0 * std::sin(0.5 * r * M_PI) / (a2 * std::sin(r * M_PI / a2));
      CHECK(raw == doctest::Approx(alt).epsilon(1e-12));
      CHECK(as::sin_prefactor(r, alpha) == doctest::Approx(raw).epsilon(1e-12));
    }
  }
}

TEST_CASE("main2 simplifies to sigma^2 t / d for r = 2, alpha > 2") {
  // RW preset with v = sigma^2/(2d): prediction is 2 v t = sigma^2 t / d.
  const double sigma2 = 2.0;
  auto p = as::AsymptoticParams::rw(4.0, sigma2 / 2.0);
  CHECK(as::moment_ratio_prediction(p, 2.0, 100.0) == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(as::moment_ratio_prediction(p, 2.0, 7.0) == doctest::Approx(7.0 * sigma2).epsilon(1e-12));
}

TEST_CASE("main2 is increasing in t and r") {
  auto p = as::AsymptoticParams::rw(1.5, 0.9);
  double prev = 0.0;
  for (double t : {1.0, 2.0, 8.0, 64.0, 512.0}) {
    const double v = as::moment_ratio_prediction(p, 0.7, t);
    CHECK(v > prev);
    prev = v;
  }
  double prev_r = 0.0;
  for (double r : {0.2, 0.5, 0.9, 1.2, 1.4}) {
    const double v = as::moment_ratio_prediction(p, r, 1000.0);
    CHECK(v > prev_r);
    prev_r = v;
  }
  CHECK_THROWS_AS(as::moment_ratio_prediction(p, 1.5, 10.0), invalid_parameter);
  CHECK_THROWS_AS(as::moment_ratio_prediction(p, 2.5, 10.0), invalid_parameter);
}

TEST_CASE("main1 diverges with the right exponent as m -> m_c") {
  auto p = as::AsymptoticParams::rw(3.0, 0.6);
  const double r = 1.0;
  // Ratio of values at eps and eps/2 should approach 2^{1+r/2}.
  const double v1 = as::generating_blowup_prediction(p, r, 1.0 - 1e-4);
  const double v2 = as::generating_blowup_prediction(p, r, 1.0 - 5e-5);
  CHECK(v2 / v1 == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-10));
  CHECK_THROWS_AS(as::generating_blowup_prediction(p, r, 1.0), invalid_parameter);
}

TEST_CASE("blowup prediction at m = 0 instantiates the closed form") {
  // alpha = 3, r = 1, RW preset: prefactor 1, Gamma(2) = 1, so the value is
  // C_I (C_II v)^{1/2} = sqrt(v).
  auto p = as::AsymptoticParams::rw(3.0, 0.5166);
  CHECK(as::generating_blowup_prediction(p, 1.0, 0.0) ==
        doctest::Approx(std::sqrt(0.5166)).epsilon(1e-13));
}

TEST_CASE("alpha = 2 log branches") {
  auto p = as::AsymptoticParams::rw(2.0, 0.5);
  // k_t = (v t log sqrt(t))^{-1/2}.
  const double t = 100.0;
  CHECK(as::k_scaling_factor(p, t) ==
        doctest::Approx(std::pow(0.5 * t * std::log(std::sqrt(t)), -0.5)).epsilon(1e-13));
  auto [expo, logf] = as::conjecture_exponent(2.0);
  CHECK(expo == doctest::Approx(0.5));
  CHECK(logf);
  auto [e15, l15] = as::conjecture_exponent(1.25);
  CHECK(e15 == doctest::Approx(0.8));
  CHECK_FALSE(l15);
  auto [e3, l3] = as::conjecture_exponent(3.0);
  CHECK(e3 == doctest::Approx(0.5));
  CHECK_FALSE(l3);
}
