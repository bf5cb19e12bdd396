#pragma once

#include <cstdint>

namespace gyrad::rng {

// SplitMix64 step; also used as a stateless mixer for keyed uniforms.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) {
  uint64_t s = x;
  return splitmix64(s);
}

inline double to_unit_interval(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// xoshiro256++ — the workhorse stream generator.  Pure integer ops, so
// sequences are identical across platforms and compilers.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform01() { return to_unit_interval(next()); }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t s_[4];
};

// Independent stream for one Monte-Carlo replica.  Streams depend only on
// (master_seed, replica), never on worker assignment, which is what makes
// estimates reproducible under any thread count.
inline Xoshiro256pp replica_stream(uint64_t master_seed, uint64_t replica) {
  uint64_t key = master_seed;
  key ^= mix64(replica + 0x51ed270b13f3d2f1ULL);
  return Xoshiro256pp(mix64(key));
}

// Keyed uniform for oriented-percolation bonds: the value is a pure function
// of the bond identity, so coupled runs (same seed, different p) share their
// uniforms bond-for-bond and the standard monotone coupling holds exactly.
inline double keyed_uniform(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = seed;
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b + 0xc2b2ae3d27d4eb4fULL));
  h = mix64(h ^ (c + 0x165667b19e3779f9ULL));
  return to_unit_interval(h);
}

}  // namespace gyrad::rng
