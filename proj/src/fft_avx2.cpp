#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <utility>

#include "fft_detail.hpp"
#include "gyrad/simd.hpp"

// AVX2 butterfly passes, arithmetic mirrored against transform_scalar
// (same FMA placement and add order) so both paths agree bitwise.

namespace gyrad::fft::detail {

void transform_avx2(double* x, const Plan& plan, bool inverse) {
  const std::size_t m = plan.m;
  for (std::size_t p = 0; p < plan.swaps.size(); p += 2) {
    const std::size_t i = plan.swaps[p], j = plan.swaps[p + 1];
    std::swap(x[2 * i], x[2 * j]);
    std::swap(x[2 * i + 1], x[2 * j + 1]);
  }

  // len == 2: one butterfly per 256-bit vector, [u, v] -> [u+v, u-v].
  for (std::size_t base = 0; base < m; base += 2) {
    const __m256d uv = _mm256_loadu_pd(x + 2 * base);
    const __m256d vu = _mm256_permute2f128_pd(uv, uv, 0x01);
    const __m256d plus = _mm256_add_pd(uv, vu);
    const __m256d minus = _mm256_sub_pd(vu, uv);  // lanes 2,3 hold u - v
    _mm256_storeu_pd(x + 2 * base, _mm256_blend_pd(plus, minus, 0b1100));
  }

  const __m256d conj_mask = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  std::size_t stage = 0;
  for (std::size_t len = 4; len <= m; len <<= 1, ++stage) {
    const std::size_t half = len / 2;
    const double* tw = plan.stage_tw[stage].data();
    for (std::size_t base = 0; base < m; base += len) {
      double* u = x + 2 * base;
      double* v = x + 2 * (base + half);
      for (std::size_t j = 0; j < half; j += 2) {
        __m256d w = _mm256_loadu_pd(tw + 2 * j);
        if (inverse) w = _mm256_xor_pd(w, conj_mask);
        const __m256d vv = _mm256_loadu_pd(v + 2 * j);
        const __m256d wr = _mm256_movedup_pd(w);
        const __m256d wi = _mm256_permute_pd(w, 0b1111);
        const __m256d vs = _mm256_permute_pd(vv, 0b0101);
        const __m256d t = _mm256_fmaddsub_pd(wr, vv, _mm256_mul_pd(wi, vs));
        const __m256d uu = _mm256_loadu_pd(u + 2 * j);
        _mm256_storeu_pd(u + 2 * j, _mm256_add_pd(uu, t));
        _mm256_storeu_pd(v + 2 * j, _mm256_sub_pd(uu, t));
      }
    }
  }

  if (inverse)
    simd::ops_for(simd::Isa::avx2).scale(x, 1.0 / static_cast<double>(m), 2 * m);
}

}  // namespace gyrad::fft::detail

#endif  // x86_64
