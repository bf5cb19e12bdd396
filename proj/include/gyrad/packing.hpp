#pragma once

#include <cstdint>
#include <span>

#include "gyrad/errors.hpp"

namespace gyrad::pack {

// Lattice points packed into one 64-bit word (64/d bits per axis, offset
// binary).  Used by the walk/percolation engines for visited-set and
// frontier membership tests.
inline int bits_per_axis(int d) { return 64 / d; }

inline long long axis_limit(int d) {
  return (1LL << (bits_per_axis(d) - 1)) - 1;
}

inline std::uint64_t pack_point(std::span<const long long> x) {
  const int d = static_cast<int>(x.size());
  const int bits = bits_per_axis(d);
  const long long lim = axis_limit(d);
  std::uint64_t key = 0;
  for (int i = 0; i < d; ++i) {
    if (x[i] < -lim || x[i] > lim)
      throw resource_limit("lattice point exceeds packed-coordinate range");
    const std::uint64_t enc =
        static_cast<std::uint64_t>(x[i] + lim) & ((bits == 64) ? ~0ULL : ((1ULL << bits) - 1));
    key |= enc << (i * bits);
  }
  return key;
}

inline void unpack_point(std::uint64_t key, std::span<long long> x) {
  const int d = static_cast<int>(x.size());
  const int bits = bits_per_axis(d);
  const long long lim = axis_limit(d);
  const std::uint64_t mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
  for (int i = 0; i < d; ++i)
    x[i] = static_cast<long long>((key >> (i * bits)) & mask) - lim;
}

}  // namespace gyrad::pack
