#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gyrad::fft {

// In-place complex FFT, interleaved re/im storage, length a power of two
// (>= 2 complex points).  Plans (bit-reversal tables and per-stage twiddles)
// are cached per size.  The butterfly passes have scalar and AVX2 variants
// with bit-identical arithmetic; selection follows gyrad::simd::active().
void transform(std::span<double> interleaved, bool inverse);

std::size_t next_pow2(std::size_t n);

// Linear convolution of a fixed real kernel with varying real signals via
// the half-complex (r2c) trick: one size-N/2 complex FFT each way.  The
// kernel spectrum is computed once at construction.  Not thread-safe; use
// one plan per worker.
class RealConvPlan {
 public:
  RealConvPlan(std::span<const double> kernel, std::size_t max_signal);

  // out receives the full linear convolution, size signal.size() +
  // kernel_size() - 1.  signal.size() must not exceed max_signal.
  void run(std::span<const double> signal, std::span<double> out);

  std::size_t kernel_size() const { return kernel_size_; }
  std::size_t fft_size() const { return n_; }

 private:
  std::size_t kernel_size_ = 0;
  std::size_t max_signal_ = 0;
  std::size_t n_ = 0;  // real transform length (power of two)
  std::size_t m_ = 0;  // n_ / 2, complex half-transform length
  std::vector<double> kernel_spec_;  // m_+1 complex entries, interleaved
  std::vector<double> rc_tw_;        // e^{-i pi k / m}, k = 0..m_/2
  std::vector<double> work_;         // m_ complex entries
};

// O(n^2) reference DFT used by tests as an independent oracle.
void naive_dft(std::span<const double> in_reim, std::span<double> out_reim,
               bool inverse);

}  // namespace gyrad::fft
