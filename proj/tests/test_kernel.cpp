#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "gyrad/asymptotics.hpp"
#include "gyrad/errors.hpp"
#include "gyrad/rng.hpp"
#include "gyrad/step_distribution.hpp"

using namespace gyrad;

namespace {

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
  return v;
}

}  // namespace

TEST_CASE("normalization and symmetry across the parameter matrix") {
  struct Case {
    int d;
    double L, alpha;
    long long R;
  };
  for (const Case c : {Case{1, 1.0, 1.5, 100},
                       Case{1, 2.0, 3.5, 50},
                       Case{2, 1.0, 2.0, 12},
                       Case{3, 1.0, 1.2, 6}}) {
    auto D = kern::build_kac_kernel(c.d, c.L, c.alpha, c.R, 0.5);
    double total = 0.0;
    for (double w : D.weights) {
      CHECK(w > 0.0);
      total += w;
    }
    CHECK(std::abs(total - 1.0) <= 1e-14);

    // Signed coordinate permutations leave the weight unchanged exactly.
    rng::Xoshiro256pp g(42);
    std::vector<long long> x(c.d), y(c.d);
    for (int trial = 0; trial < 50; ++trial) {
      for (int i = 0; i < c.d; ++i)
        x[i] = static_cast<long long>(g.uniform01() * (2 * c.R + 1)) - c.R;
      y = x;
      for (int i = 0; i < c.d; ++i) y[i] = -y[i];
      if (c.d >= 2) std::swap(y[0], y[1]);
      CHECK(D.at(x) == D.at(y));
    }
  }
}

TEST_CASE("c_h matches the direct profile sum (d=1, alpha=1.5, R=100)") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 100);
  long double s = 0.0L;
  for (long long x = -100; x <= 100; ++x) {
    const long double ax = std::max<long double>(std::abs((long double)x), 1.0L);
    s += powl(ax, -2.5L);
  }
  const double c_h_oracle = static_cast<double>(1.0L / s);
  CHECK(D.c_h == doctest::Approx(c_h_oracle).epsilon(1e-13));
  std::vector<long long> origin{0};
  CHECK(D.at(origin) == doctest::Approx(c_h_oracle).epsilon(1e-13));
  std::vector<long long> p3{3}, m3{-3};
  CHECK(D.at(p3) == D.at(m3));
}

TEST_CASE("fourier transform basics") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 100);
  std::vector<double> k{0.0};
  CHECK(kern::fourier(D, k) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kern::one_minus_fourier(D, k) == 0.0);

  // k = pi: alternating-sign oracle by direct summation.
  k[0] = M_PI;
  long double alt = 0.0L;
  std::vector<long long> x{0};
  for (long long xi = -100; xi <= 100; ++xi) {
    x[0] = xi;
    alt += ((xi % 2) ? -1.0L : 1.0L) * (long double)D.at(x);
  }
  CHECK(kern::fourier(D, k) ==
        doctest::Approx(static_cast<double>(alt)).epsilon(1e-12));

  for (double kk : {0.01, 0.1, 1.0, 3.0}) {
    k[0] = kk;
    const double omf = kern::one_minus_fourier(D, k);
    CHECK(omf > 0.0);
    CHECK(std::abs((1.0 - kern::fourier(D, k)) - omf) < 1e-12);
    CHECK(std::abs(kern::fourier(D, k)) <= 1.0);
  }
}

TEST_CASE("absolute moments: finite, divergent-flagged, and growth rate") {
  std::vector<long long> x{0};
  {
    auto D = kern::build_kac_kernel(1, 1.0, 3.5, 200);
    auto m0 = kern::abs_moment(D, 0.0);
    CHECK(m0.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(m0.divergent);

    auto m2 = kern::abs_moment(D, 2.0);
    CHECK_FALSE(m2.divergent);
    long double oracle = 0.0L;
    for (long long xi = -200; xi <= 200; ++xi) {
      x[0] = xi;
      oracle += (long double)(xi * xi) * (long double)D.at(x);
    }
    CHECK(m2.value == doctest::Approx((double)oracle).epsilon(1e-12));

    // Convergence under radius doubling (alpha > 2 moment is finite).
    auto D2 = kern::build_kac_kernel(1, 1.0, 3.5, 400);
    CHECK(std::abs(kern::abs_moment(D2, 2.0).value - m2.value) / m2.value < 2e-3);
  }
  {
    auto Da = kern::build_kac_kernel(1, 1.0, 1.5, 200);
    auto Db = kern::build_kac_kernel(1, 1.0, 1.5, 400);
    auto ma = kern::abs_moment(Da, 2.0);
    auto mb = kern::abs_moment(Db, 2.0);
    CHECK(ma.divergent);
    CHECK(mb.divergent);
    // Truncated value grows like R^{2 - alpha} = R^{1/2}.
    CHECK(mb.value / ma.value == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  }
  CHECK_THROWS_AS(
      kern::abs_moment(kern::build_kac_kernel(1, 1.0, 1.5, 10), -1.0),
      invalid_parameter);
}

TEST_CASE("closed-form v_alpha branches") {
  {  // alpha > 2: sigma^2 / (2d)
    auto D = kern::build_kac_kernel(1, 1.0, 4.0, 150);
    const double sigma2 = kern::abs_moment(D, 2.0).value;
    CHECK(kern::v_alpha_closed_form(D) ==
          doctest::Approx(sigma2 / 2.0).epsilon(1e-13));
  }
  {  // alpha = 2, d = 1, L = 1: omega_1 = 2 so v_2 = c_h.
    auto D = kern::build_kac_kernel(1, 1.0, 2.0, 100);
    CHECK(asympt::sphere_surface(1) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(kern::v_alpha_closed_form(D) == doctest::Approx(D.c_h).epsilon(1e-12));
  }
  {  // alpha < 2, d = 1: integral equals 2 K_alpha (Lemma-style identity).
    auto D = kern::build_kac_kernel(1, 1.0, 1.5, 100);
    const double expect = D.c_h * 2.0 * asympt::K_r_closed(1.5);
    CHECK(kern::v_alpha_closed_form(D) == doctest::Approx(expect).epsilon(1e-8));
  }
  {  // d = 2 and d = 3 tail machinery sanity: positive and stable under R.
    auto D2 = kern::build_kac_kernel(2, 1.0, 1.5, 20, 0.2);
    CHECK(kern::v_alpha_closed_form(D2) > 0.0);
    auto D3 = kern::build_kac_kernel(3, 1.0, 1.5, 8, 0.5);
    CHECK(kern::v_alpha_closed_form(D3) > 0.0);
  }
}

TEST_CASE("dispersion fit recovers alpha ^ 2") {
  {
    auto D = kern::build_kac_kernel(1, 1.0, 3.0, 100);
    auto f = kern::fit_dispersion(D, logspace(0.003, 0.03, 9), false);
    CHECK(std::abs(f.exponent_est - 2.0) < 0.05);
  }
  {
    auto D = kern::build_kac_kernel(1, 1.0, 1.5, 2000);
    auto f = kern::fit_dispersion(D, logspace(0.002, 0.02, 9), false);
    CHECK(std::abs(f.exponent_est - 1.5) < 0.05);
  }
  {
    auto D = kern::build_kac_kernel(1, 1.0, 2.0, 2000);
    auto grid = logspace(0.005, 0.05, 12);
    auto fp = kern::fit_dispersion(D, grid, false);
    auto fl = kern::fit_dispersion(D, grid, true);
    CHECK(fl.residual < fp.residual);
    CHECK(fl.exponent_est == 2.0);
    CHECK(fl.v_alpha_est ==
          doctest::Approx(kern::v_alpha_closed_form(D)).epsilon(0.02));
  }
  // Exponent converges to alpha ^ 2 as the grid shrinks.
  {
    auto D = kern::build_kac_kernel(1, 1.0, 1.5, 10000);
    double prev_err = 1e9;
    for (auto [lo, hi] : {std::pair<double, double>{0.01, 0.1},
                          {0.005, 0.05},
                          {0.002, 0.02}}) {
      auto f = kern::fit_dispersion(D, logspace(lo, hi, 9), false);
      const double err = std::abs(f.exponent_est - 1.5);
      CHECK(err < prev_err);
      prev_err = err;
    }
  }
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 100);
  std::vector<double> short_grid{0.01, 0.02, 0.1};
  CHECK_THROWS_AS(kern::fit_dispersion(D, short_grid, false), invalid_parameter);
}

TEST_CASE("truncation: tail bound scaling and error branch") {
  auto Da = kern::build_kac_kernel(1, 1.0, 1.5, 200);
  auto Db = kern::build_kac_kernel(1, 1.0, 1.5, 400);
  CHECK(Db.tail_bound / Da.tail_bound ==
        doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-3));

  // The bound really dominates the measured annulus mass.
  long double annulus = 0.0L, box = 0.0L;
  for (long long xv = -400; xv <= 400; ++xv) {
    const long double h = powl(std::max<long double>(std::abs((long double)xv), 1.0L), -2.5L);
    box += h;
    if (std::abs(xv) > 200) annulus += h;
  }
  CHECK(static_cast<double>(annulus / box) < Da.tail_bound);

  CHECK_THROWS_AS(kern::build_kac_kernel(1, 1.0, 0.4, 10, 1e-6), truncation_error);
  CHECK_THROWS_AS(kern::build_kac_kernel(1, 1.0, -1.0, 100), invalid_parameter);
  CHECK_THROWS_AS(kern::build_kac_kernel(1, 1.0, 1.5, 0), invalid_parameter);
  CHECK_THROWS_AS(kern::build_kac_kernel(1, 4.5, 1.5, 3), invalid_parameter);
}

TEST_CASE("doubling R perturbs the dispersion only at O(R^{-alpha})") {
  auto Da = kern::build_kac_kernel(1, 1.0, 1.5, 200);
  auto Db = kern::build_kac_kernel(1, 1.0, 1.5, 400);
  std::vector<double> k{0.0};
  for (double kk : {0.05, 0.1, 0.2}) {
    k[0] = kk;
    const double ya = kern::one_minus_fourier(Da, k);
    const double yb = kern::one_minus_fourier(Db, k);
    // Budget: constant * R^{-1.5} relative.
    CHECK(std::abs(ya - yb) / yb < 30.0 * std::pow(200.0, -1.5));
  }
}

TEST_CASE("alias sampler: frequencies, symmetry, determinism") {
  auto D = kern::build_kac_kernel(1, 1.0, 1.5, 30, 0.02);
  kern::StepSampler sampler(D);

  const long long N = 1000000;
  rng::Xoshiro256pp g(2024);
  std::vector<long long> counts(D.size(), 0);
  std::vector<long long> step{0};
  long double sum_x = 0.0L;
  for (long long i = 0; i < N; ++i) {
    const std::size_t idx = sampler.sample(g, step);
    counts[idx]++;
    sum_x += static_cast<long double>(step[0]);
  }
  // 10 probe sites within 4 binomial standard errors.
  std::vector<long long> probe{0};
  for (long long xv : {0LL, 1LL, -1LL, 2LL, 5LL, -5LL, 10LL, -17LL, 25LL, 30LL}) {
    probe[0] = xv;
    const double w = D.at(probe);
    const double freq =
        static_cast<double>(counts[D.index(probe)]) / static_cast<double>(N);
    const double se = std::sqrt(w * (1.0 - w) / static_cast<double>(N));
    CHECK(std::abs(freq - w) <= 4.0 * se);
  }
  // Mean is 0 within 4 standard errors of the step standard deviation.
  const double sigma = std::sqrt(kern::abs_moment(D, 2.0).value);
  CHECK(std::abs(static_cast<double>(sum_x) / N) <=
        4.0 * sigma / std::sqrt(static_cast<double>(N)));

  // Same seed, same draws.
  rng::Xoshiro256pp g1(77), g2(77);
  std::vector<long long> s1{0}, s2{0};
  for (int i = 0; i < 1000; ++i) {
    sampler.sample(g1, s1);
    sampler.sample(g2, s2);
    CHECK(s1[0] == s2[0]);
  }
}

TEST_CASE("kernel json round trip is exact") {
  auto D = kern::build_kac_kernel(2, 1.5, 2.5, 6, 0.1);
  const std::string path = "test_kernel_roundtrip.json";
  kern::save_json(D, path);
  auto E = kern::load_json(path);
  CHECK(E.d == D.d);
  CHECK(E.L == D.L);
  CHECK(E.alpha == D.alpha);
  CHECK(E.radius == D.radius);
  CHECK(E.c_h == D.c_h);
  CHECK(E.tail_bound == D.tail_bound);
  REQUIRE(E.weights.size() == D.weights.size());
  for (std::size_t i = 0; i < D.weights.size(); ++i)
    CHECK(E.weights[i] == D.weights[i]);
  std::filesystem::remove(path);
}
