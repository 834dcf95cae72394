#pragma once

#include <cstdint>
#include <stdexcept>

namespace qtree::rng {

inline constexpr std::uint64_t kLcg48Mask = (std::uint64_t{1} << 48) - 1;

// POSIX drand48 constants.
inline constexpr std::uint64_t kDrand48A = 0x5DEECE66Dull;
inline constexpr std::uint64_t kDrand48C = 0xBull;

/// 48-bit linear congruential generator x_{n+1} = (a x_n + c) mod 2^48.
struct Lcg48State {
  std::uint64_t x = 0;  // current state, < 2^48
  std::uint64_t a = kDrand48A;
  std::uint64_t c = kDrand48C;
};

/// srand48-style seeding: the seed fills the top 32 bits, low bits 0x330E.
inline Lcg48State lcg48_seed(std::uint64_t seed) {
  return Lcg48State{((seed << 16) | 0x330Eull) & kLcg48Mask};
}

/// Advances one step and returns the uniform x/2^48 in [0,1).
inline double lcg48_next(Lcg48State& s) {
  // 64-bit wraparound is harmless: 2^48 divides 2^64.
  s.x = (s.a * s.x + s.c) & kLcg48Mask;
  return static_cast<double>(s.x) * 0x1p-48;
}

/// Affine map x -> (A x + C) mod 2^48 equivalent to a fixed number of steps.
struct Lcg48Jump {
  std::uint64_t A = 1;
  std::uint64_t C = 0;

  void apply(Lcg48State& s) const { s.x = (A * s.x + C) & kLcg48Mask; }
};

namespace detail {
// g after f, both mod 2^48.
inline Lcg48Jump lcg48_compose(const Lcg48Jump& g, const Lcg48Jump& f) {
  return {(g.A * f.A) & kLcg48Mask, (g.A * f.C + g.C) & kLcg48Mask};
}
}  // namespace detail

/// Coefficients (A, C) with A = a^s and C = c (1 + a + ... + a^{s-1}) mod 2^48,
/// computed by binary splitting in O(log s). One application equals s steps.
inline Lcg48Jump lcg48_skip_coefficients(std::uint64_t a, std::uint64_t c,
                                         std::uint64_t steps) {
  if (steps == 0) throw std::invalid_argument("lcg48_skip_coefficients: steps must be >= 1");
  Lcg48Jump acc{1, 0};
  Lcg48Jump base{a & kLcg48Mask, c & kLcg48Mask};
  while (steps != 0) {
    if (steps & 1) acc = detail::lcg48_compose(base, acc);
    base = detail::lcg48_compose(base, base);
    steps >>= 1;
  }
  return acc;
}

/// Jumps the state forward by `steps` without generating output.
inline void lcg48_skip(Lcg48State& s, std::uint64_t steps) {
  if (steps == 0) return;
  lcg48_skip_coefficients(s.a, s.c, steps).apply(s);
}

}  // namespace qtree::rng
