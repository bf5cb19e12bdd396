#pragma once

#include <cstddef>
#include <string>

namespace gyrad::simd {

// Arithmetic kernels used by the hot loops (convolution, moment sums, FFT
// spectra).  Two implementations exist: a scalar reference and an AVX2
// variant.  The scalar code mirrors the vector lane structure and FMA usage
// operation-for-operation, so both paths produce bit-identical results; the
// equivalence tests assert exact equality, and runtime dispatch can never
// change a result.
//
// sum/dot use four independent lanes over 1024-element blocks with a pairwise
// reduction across blocks, which keeps rounding error at the eps*log(n) scale
// needed by the mass-conservation checks.
struct Ops {
  const char* name;
  // Blocked pairwise sum of x[0..n).
  double (*sum)(const double* x, std::size_t n);
  // Blocked pairwise FMA dot product of x and y.
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i] (fused).
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // Pointwise complex multiply, interleaved re/im storage, out = a * b.
  void (*cmul)(const double* a, const double* b, double* out,
               std::size_t n_complex);
  // x[i] *= a.
  void (*scale)(double* x, double a, std::size_t n);
};

enum class Isa { scalar, avx2 };

bool cpu_has_avx2();

// Implementation table for a specific ISA (throws invalid_parameter when the
// CPU lacks it).  Used by the equivalence tests.
const Ops& ops_for(Isa isa);

// Runtime-selected table: AVX2 when available, overridable with
// GYRAD_SIMD=scalar|avx2 (resolved once per process).
const Ops& active();

std::string active_name();

}  // namespace gyrad::simd
