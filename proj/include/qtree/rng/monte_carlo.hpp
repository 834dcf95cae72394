#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qtree/rng/stream.hpp"

namespace qtree::rng {

struct PiEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t points = 0;
};

namespace detail {
inline std::uint64_t count_inside_quarter_disk(RngStream& g, std::uint64_t points) {
  std::uint64_t inside = 0;
  for (std::uint64_t i = 0; i < points; ++i) {
    const double u = g.next_uniform();
    const double v = g.next_uniform();
    if (u * u + v * v <= 1.0) ++inside;
  }
  return inside;
}

inline PiEstimate pi_from_counts(std::uint64_t inside, std::uint64_t points) {
  const double est = 4.0 * static_cast<double>(inside) / static_cast<double>(points);
  const double se = std::sqrt(est * (4.0 - est) / static_cast<double>(points));
  return {est, se, points};
}
}  // namespace detail

/// Quarter-disk Monte Carlo estimate of pi from `samples` uniforms (samples/2
/// points); the std error is the binomial sqrt(pi_hat (4 - pi_hat) / points).
inline PiEstimate estimate_pi(RngStream& g, std::uint64_t samples) {
  if (samples == 0 || samples % 2 != 0)
    throw std::invalid_argument("estimate_pi: sample count must be positive and even");
  const std::uint64_t points = samples / 2;
  return detail::pi_from_counts(detail::count_inside_quarter_disk(g, points), points);
}

/// Same estimator with the draws partitioned over `streams` parallel streams
/// running on their own threads. The inside-count is an integer sum, so the
/// result is independent of scheduling and thread count.
inline PiEstimate estimate_pi_partitioned(EngineKind kind, std::uint64_t seed,
                                          std::uint64_t samples, std::uint64_t streams,
                                          PartitionMode mode) {
  if (streams == 0) throw std::invalid_argument("estimate_pi_partitioned: streams must be >= 1");
  if (samples == 0 || samples % (2 * streams) != 0)
    throw std::invalid_argument(
        "estimate_pi_partitioned: sample count must be a positive multiple of 2*streams");
  const std::uint64_t per_stream = samples / streams;

  std::vector<std::uint64_t> inside(streams, 0);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t chunk = (streams + hw - 1) / hw;
  std::vector<std::thread> pool;
  for (std::uint64_t begin = 0; begin < streams; begin += chunk) {
    const std::uint64_t end = std::min(streams, begin + chunk);
    pool.emplace_back([&, begin, end] {
      for (std::uint64_t i = begin; i < end; ++i) {
        StreamPartition part{mode, streams, i, per_stream};
        RngStream g = split_stream(kind, seed, part);
        inside[i] = detail::count_inside_quarter_disk(g, per_stream / 2);
      }
    });
  }
  for (auto& t : pool) t.join();

  std::uint64_t total = 0;
  for (auto c : inside) total += c;
  return detail::pi_from_counts(total, samples / 2);
}

}  // namespace qtree::rng
