#pragma once

#include <cstddef>

namespace gyrad::simd::detail {

// Shared block/tree structure for sum and dot.  Both ISA variants reduce
// 1024-element blocks with four lanes and combine block results pairwise;
// the tree shape depends only on n, so results match across variants.
inline constexpr std::size_t kBlock = 1024;

template <typename BlockFn>
double tree_reduce(const double* x, const double* y, std::size_t n,
                   BlockFn block) {
  if (n <= kBlock) return block(x, y, n);
  std::size_t m = kBlock;
  while (m * 2 < n) m *= 2;
  return tree_reduce(x, y, m, block) + tree_reduce(x + m, y ? y + m : nullptr, n - m, block);
}

}  // namespace gyrad::simd::detail
