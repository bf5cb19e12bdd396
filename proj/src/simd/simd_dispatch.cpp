#include <cstdlib>
#include <string>

#include "gyrad/errors.hpp"
#include "gyrad/simd.hpp"

namespace gyrad::simd {

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops& ops_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return scalar_ops();
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (cpu_has_avx2()) return avx2_ops();
#endif
      throw invalid_parameter("AVX2 kernels requested but the CPU lacks AVX2/FMA");
  }
  throw invalid_parameter("unknown ISA");
}

namespace {

const Ops& resolve() {
  if (const char* env = std::getenv("GYRAD_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return ops_for(Isa::scalar);
    if (v == "avx2") return ops_for(Isa::avx2);
    throw invalid_parameter("GYRAD_SIMD must be 'scalar' or 'avx2', got '" + v + "'");
  }
  return cpu_has_avx2() ? ops_for(Isa::avx2) : ops_for(Isa::scalar);
}

}  // namespace

const Ops& active() {
  static const Ops& selected = resolve();
  return selected;
}

std::string active_name() { return active().name; }

}  // namespace gyrad::simd
