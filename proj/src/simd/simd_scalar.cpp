#include <cmath>
#include <cstddef>

#include "gyrad/simd.hpp"
#include "simd_block.hpp"

// Scalar reference kernels.  These mirror the AVX2 variant lane-for-lane
// (four accumulator lanes, identical FMA placement, identical horizontal
// combine), so the two implementations agree bitwise.

namespace gyrad::simd {
namespace {

double block_sum(const double* x, const double*, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t m4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m4; i += 4) {
    l0 += x[i];
    l1 += x[i + 1];
    l2 += x[i + 2];
    l3 += x[i + 3];
  }
  double lane[4] = {l0, l1, l2, l3};
  for (std::size_t j = 0; m4 + j < n; ++j) lane[j] += x[m4 + j];
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double block_dot(const double* x, const double* y, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t m4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < m4; i += 4) {
    l0 = std::fma(x[i], y[i], l0);
    l1 = std::fma(x[i + 1], y[i + 1], l1);
    l2 = std::fma(x[i + 2], y[i + 2], l2);
    l3 = std::fma(x[i + 3], y[i + 3], l3);
  }
  double lane[4] = {l0, l1, l2, l3};
  for (std::size_t j = 0; m4 + j < n; ++j)
    lane[j] = std::fma(x[m4 + j], y[m4 + j], lane[j]);
  return (lane[0] + lane[2]) + (lane[1] + lane[3]);
}

double sum_scalar(const double* x, std::size_t n) {
  return detail::tree_reduce(x, nullptr, n, block_sum);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  return detail::tree_reduce(x, y, n, block_dot);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void cmul_scalar(const double* a, const double* b, double* out,
                 std::size_t n_complex) {
  for (std::size_t k = 0; k < n_complex; ++k) {
    const double ar = a[2 * k], ai = a[2 * k + 1];
    const double br = b[2 * k], bi = b[2 * k + 1];
    out[2 * k] = std::fma(ar, br, -(ai * bi));
    out[2 * k + 1] = std::fma(ar, bi, ai * br);
  }
}

void scale_scalar(double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{"scalar",     sum_scalar,  dot_scalar,
                         axpy_scalar, cmul_scalar, scale_scalar};
  return table;
}

}  // namespace gyrad::simd
