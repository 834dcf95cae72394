#pragma once

#include <array>
#include <cstdint>

namespace qtree::rng {

inline constexpr std::uint64_t kMrgM1 = 4294967087ull;  // 2^32 - 209
inline constexpr std::uint64_t kMrgM2 = 4294944443ull;  // 2^32 - 22853
inline constexpr std::int64_t kMrgA12 = 1403580;
inline constexpr std::int64_t kMrgA13n = 810728;
inline constexpr std::int64_t kMrgA21 = 527612;
inline constexpr std::int64_t kMrgA23n = 1370589;

/// L'Ecuyer's MRG32k3a: two order-3 recurrences combined modulo m1.
/// s1/s2 hold the last three values of each component, oldest first.
struct Mrg32k3aState {
  std::array<std::uint64_t, 3> s1{0, 0, 1};
  std::array<std::uint64_t, 3> s2{0, 0, 1};
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& z) {
  z += 0x9E3779B97F4A7C15ull;
  std::uint64_t v = z;
  v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
  v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
  return v ^ (v >> 31);
}
}  // namespace detail

/// Seeds both components with nonzero words in [1, m-1], so neither
/// history can be all zero.
inline Mrg32k3aState mrg32k3a_seed(std::uint64_t seed) {
  Mrg32k3aState s;
  std::uint64_t z = seed;
  for (int i = 0; i < 3; ++i) s.s1[i] = 1 + detail::splitmix64(z) % (kMrgM1 - 1);
  for (int i = 0; i < 3; ++i) s.s2[i] = 1 + detail::splitmix64(z) % (kMrgM2 - 1);
  return s;
}

/// One step of both recurrences; returns (x1 - x2 mod m1 + 1) / (m1 + 1),
/// a uniform strictly inside (0,1).
inline double mrg32k3a_next(Mrg32k3aState& s) {
  // Negative intermediates are kept in signed 64-bit and normalized after
  // the modulus; the products stay below 2^53.
  std::int64_t p1 = (kMrgA12 * static_cast<std::int64_t>(s.s1[1]) -
                     kMrgA13n * static_cast<std::int64_t>(s.s1[0])) %
                    static_cast<std::int64_t>(kMrgM1);
  if (p1 < 0) p1 += static_cast<std::int64_t>(kMrgM1);
  s.s1 = {s.s1[1], s.s1[2], static_cast<std::uint64_t>(p1)};

  std::int64_t p2 = (kMrgA21 * static_cast<std::int64_t>(s.s2[2]) -
                     kMrgA23n * static_cast<std::int64_t>(s.s2[0])) %
                    static_cast<std::int64_t>(kMrgM2);
  if (p2 < 0) p2 += static_cast<std::int64_t>(kMrgM2);
  s.s2 = {s.s2[1], s.s2[2], static_cast<std::uint64_t>(p2)};

  std::uint64_t x = static_cast<std::uint64_t>(p1) >= static_cast<std::uint64_t>(p2)
                        ? static_cast<std::uint64_t>(p1 - p2)
                        : static_cast<std::uint64_t>(p1) + kMrgM1 - static_cast<std::uint64_t>(p2);
  return static_cast<double>(x + 1) / static_cast<double>(kMrgM1 + 1);
}

namespace detail {

using Mat3 = std::array<std::array<std::uint64_t, 3>, 3>;

inline Mat3 mat3_identity() {
  return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

inline Mat3 mat3_mulmod(const Mat3& a, const Mat3& b, std::uint64_t m) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      unsigned __int128 acc = 0;
      for (int k = 0; k < 3; ++k)
        acc += static_cast<unsigned __int128>(a[i][k]) * b[k][j];
      r[i][j] = static_cast<std::uint64_t>(acc % m);
    }
  return r;
}

inline std::array<std::uint64_t, 3> mat3_vecmod(const Mat3& a,
                                                const std::array<std::uint64_t, 3>& v,
                                                std::uint64_t m) {
  std::array<std::uint64_t, 3> r{};
  for (int i = 0; i < 3; ++i) {
    unsigned __int128 acc = 0;
    for (int k = 0; k < 3; ++k)
      acc += static_cast<unsigned __int128>(a[i][k]) * v[k];
    r[i] = static_cast<std::uint64_t>(acc % m);
  }
  return r;
}

inline Mat3 mat3_powmod(Mat3 base, std::uint64_t e, std::uint64_t m) {
  Mat3 acc = mat3_identity();
  while (e != 0) {
    if (e & 1) acc = mat3_mulmod(acc, base, m);
    base = mat3_mulmod(base, base, m);
    e >>= 1;
  }
  return acc;
}

// Companion matrices acting on (x_{n-3}, x_{n-2}, x_{n-1}).
inline Mat3 mrg_companion1() {
  return {{{0, 1, 0},
           {0, 0, 1},
           {kMrgM1 - static_cast<std::uint64_t>(kMrgA13n), static_cast<std::uint64_t>(kMrgA12), 0}}};
}

inline Mat3 mrg_companion2() {
  return {{{0, 1, 0},
           {0, 0, 1},
           {kMrgM2 - static_cast<std::uint64_t>(kMrgA23n), 0, static_cast<std::uint64_t>(kMrgA21)}}};
}

}  // namespace detail

/// Precomputed s-step transition: one 3x3 matrix per component.
struct Mrg32k3aJump {
  detail::Mat3 a1 = detail::mat3_identity();
  detail::Mat3 a2 = detail::mat3_identity();

  void apply(Mrg32k3aState& s) const {
    s.s1 = detail::mat3_vecmod(a1, s.s1, kMrgM1);
    s.s2 = detail::mat3_vecmod(a2, s.s2, kMrgM2);
  }
};

/// Matrix powers of the companion matrices; steps = 0 is the identity.
inline Mrg32k3aJump mrg32k3a_skip_coefficients(std::uint64_t steps) {
  Mrg32k3aJump j;
  j.a1 = detail::mat3_powmod(detail::mrg_companion1(), steps, kMrgM1);
  j.a2 = detail::mat3_powmod(detail::mrg_companion2(), steps, kMrgM2);
  return j;
}

/// Jumps the state forward by `steps` (equivalent to `steps` next() calls).
inline void mrg32k3a_skip(Mrg32k3aState& s, std::uint64_t steps) {
  if (steps == 0) return;
  mrg32k3a_skip_coefficients(steps).apply(s);
}

}  // namespace qtree::rng
