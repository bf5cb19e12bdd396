#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "fft_detail.hpp"
#include "gyrad/fft.hpp"
#include "gyrad/rng.hpp"
#include "gyrad/simd.hpp"

namespace fftd = gyrad::fft::detail;
using namespace gyrad;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  rng::Xoshiro256pp g(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * g.uniform01() - 1.0;
  return v;
}

std::vector<double> naive_conv(const std::vector<double>& a,
                               const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace

TEST_CASE("transform matches the reference DFT") {
  for (std::size_t m : {2ul, 4ul, 8ul, 64ul, 256ul}) {
    std::vector<double> in = random_vec(2 * m, 101 + m);
    std::vector<double> expect(2 * m);
    fft::naive_dft(in, expect, false);
    std::vector<double> got = in;
    fft::transform(got, false);
    for (std::size_t i = 0; i < 2 * m; ++i)
      CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("inverse transform round-trips") {
  std::vector<double> in = random_vec(2 * 512, 7);
  std::vector<double> x = in;
  fft::transform(x, false);
  fft::transform(x, true);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(x[i] == doctest::Approx(in[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("scalar and AVX2 butterfly passes agree bitwise") {
  if (!simd::cpu_has_avx2()) return;
  for (std::size_t m : {2ul, 4ul, 16ul, 1024ul, 16384ul}) {
    std::vector<double> a = random_vec(2 * m, 31 + m);
    std::vector<double> b = a;
    const auto& plan = fftd::plan_for(m);
    fftd::transform_scalar(a.data(), plan, false);
    fftd::transform_avx2(b.data(), plan, false);
    CHECK(std::memcmp(a.data(), b.data(), 2 * m * sizeof(double)) == 0);
    fftd::transform_scalar(a.data(), plan, true);
    fftd::transform_avx2(b.data(), plan, true);
    CHECK(std::memcmp(a.data(), b.data(), 2 * m * sizeof(double)) == 0);
  }
}

TEST_CASE("real convolution matches the direct product") {
  for (auto [na, nb] : {std::pair<std::size_t, std::size_t>{5, 3},
                        {64, 9},
                        {1000, 401},
                        {4097, 31}}) {
    std::vector<double> sig = random_vec(na, na);
    std::vector<double> ker = random_vec(nb, nb);
    const std::vector<double> expect = naive_conv(sig, ker);

    fft::RealConvPlan plan(ker, na);
    std::vector<double> got(na + nb - 1);
    plan.run(sig, got);
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("convolution plan accepts shorter signals") {
  std::vector<double> ker = random_vec(11, 3);
  fft::RealConvPlan plan(ker, 500);
  std::vector<double> sig = random_vec(120, 4);
  std::vector<double> got(120 + 11 - 1);
  plan.run(sig, got);
  const std::vector<double> expect = naive_conv(sig, ker);
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-11).scale(1.0));
}

TEST_CASE("probability mass is conserved through spectral convolution") {
  std::vector<double> ker(101);
  double tot = 0.0;
  for (std::size_t i = 0; i < ker.size(); ++i) {
    ker[i] = 1.0 / (1.0 + std::abs(50.0 - static_cast<double>(i)));
    tot += ker[i];
  }
  for (auto& k : ker) k /= tot;

  std::vector<double> f(2001, 0.0);
  f[1000] = 1.0;
  fft::RealConvPlan plan(ker, 4096);
  for (int step = 0; step < 20; ++step) {
    std::vector<double> out(f.size() + ker.size() - 1);
    plan.run(f, out);
    f = std::move(out);
  }
  const double mass = simd::active().sum(f.data(), f.size());
  CHECK(std::abs(mass - 1.0) < 1e-12);
}
