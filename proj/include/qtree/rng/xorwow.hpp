#pragma once

#include <cstdint>

#include "qtree/rng/mrg32k3a.hpp"  // detail::splitmix64

namespace qtree::rng {

/// Marsaglia's XORWOW: five xorshift words plus a Weyl counter d.
struct XorwowState {
  std::uint32_t v = 0, w = 0, x = 0, y = 0, z = 0;
  std::uint32_t d = 0;
};

/// Scrambles (seed, stream) into a full state; (v,w,x,y,z) is never all zero.
inline XorwowState xorwow_seed(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  XorwowState s;
  std::uint64_t a = detail::splitmix64(z);
  std::uint64_t b = detail::splitmix64(z);
  std::uint64_t c = detail::splitmix64(z);
  s.v = static_cast<std::uint32_t>(a);
  s.w = static_cast<std::uint32_t>(a >> 32);
  s.x = static_cast<std::uint32_t>(b);
  s.y = static_cast<std::uint32_t>(b >> 32);
  s.z = static_cast<std::uint32_t>(c);
  s.d = static_cast<std::uint32_t>(c >> 32);
  if ((s.v | s.w | s.x | s.y | s.z) == 0) s.v = 1;
  return s;
}

/// One step of the xorshift kernel; returns v + d mod 2^32.
inline std::uint32_t xorwow_next(XorwowState& s) {
  std::uint32_t t = s.x ^ (s.x >> 2);
  s.x = s.y;
  s.y = s.z;
  s.z = s.w;
  s.w = s.v;
  s.v = (s.v ^ (s.v << 4)) ^ (t ^ (t << 1));
  s.d += 362437;
  return s.v + s.d;
}

/// Uniform in [0,1) with 32 bits of resolution.
inline double xorwow_next_uniform(XorwowState& s) {
  return static_cast<double>(xorwow_next(s)) * 0x1p-32;
}

}  // namespace qtree::rng
