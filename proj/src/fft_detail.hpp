#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gyrad::fft::detail {

struct Plan {
  std::size_t m = 0;                  // complex length, power of two
  std::vector<std::uint32_t> swaps;   // bit-reversal swaps, flattened (i, j) pairs
  // stage_tw[s] holds the twiddles for stage len = 4 << s (half = len/2
  // complex entries, interleaved).  The len == 2 stage needs none.
  std::vector<std::vector<double>> stage_tw;
};

const Plan& plan_for(std::size_t m);

void transform_scalar(double* x, const Plan& plan, bool inverse);
#if defined(__x86_64__) || defined(_M_X64)
void transform_avx2(double* x, const Plan& plan, bool inverse);
#endif

}  // namespace gyrad::fft::detail
