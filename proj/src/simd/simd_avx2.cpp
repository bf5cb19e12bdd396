#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "gyrad/simd.hpp"
#include "simd_block.hpp"

// AVX2+FMA kernels.  Only safe to call after the dispatcher has confirmed
// CPU support; this translation unit is the single place built with -mavx2.

namespace gyrad::simd {
namespace {

double block_sum(const double* x, const double*, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t m4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m4; i += 4)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = 0; m4 + j < n; ++j) lane[j] += x[m4 + j];
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double block_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t m4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m4; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t j = 0; m4 + j < n; ++j)
    lane[j] = std::fma(x[m4 + j], y[m4 + j], lane[j]);
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double sum_avx2(const double* x, std::size_t n) {
  return detail::tree_reduce(x, nullptr, n, block_sum);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  return detail::tree_reduce(x, y, n, block_dot);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const std::size_t m4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m4; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (std::size_t i = m4; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void cmul_avx2(const double* a, const double* b, double* out,
               std::size_t n_complex) {
  const std::size_t m2 = n_complex & ~std::size_t{1};  // 2 complex per vector
  for (std::size_t k = 0; k < m2; k += 2) {
    const __m256d av = _mm256_loadu_pd(a + 2 * k);
    const __m256d bv = _mm256_loadu_pd(b + 2 * k);
    const __m256d ar = _mm256_movedup_pd(av);          // [re re re re]
    const __m256d ai = _mm256_permute_pd(av, 0b1111);  // [im im im im]
    const __m256d bs = _mm256_permute_pd(bv, 0b0101);  // [bi br bi br]
    const __m256d res = _mm256_fmaddsub_pd(ar, bv, _mm256_mul_pd(ai, bs));
    _mm256_storeu_pd(out + 2 * k, res);
  }
  for (std::size_t k = m2; k < n_complex; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    const double br = b[2 * k], bi = b[2 * k + 1];
    out[2 * k] = std::fma(ar, br, -(ai * bi));
    out[2 * k + 1] = std::fma(ar, bi, ai * br);
  }
}

void scale_avx2(double* x, double a, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const std::size_t m4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m4; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (std::size_t i = m4; i < n; ++i) x[i] *= a;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table{"avx2",     sum_avx2,  dot_avx2,
                         axpy_avx2, cmul_avx2, scale_avx2};
  return table;
}

}  // namespace gyrad::simd

#endif  // x86_64
