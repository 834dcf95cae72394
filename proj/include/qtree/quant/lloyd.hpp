#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "qtree/errors.hpp"
#include "qtree/quant/grid.hpp"
#include "qtree/quant/nn.hpp"
#include "qtree/rng/stream.hpp"

namespace qtree::quant {

/// Anything that can fill a d-vector with a fresh draw from a target law.
template <class S>
concept PointSampler = requires(const S s, rng::RngStream& g, std::span<double> out) {
  { s.dim() } -> std::convertible_to<int>;
  s.sample(g, out);
};

/// Monte Carlo estimate of the quadratic distortion E min_i |X - x_i|^2.
struct QuantError {
  double distortion = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

template <PointSampler S>
QuantError distortion(const QuantGrid& grid, const S& sampler, std::uint64_t samples,
                      rng::RngStream& g, NnBackend backend = NnBackend::KdTree) {
  if (samples == 0) throw std::invalid_argument("distortion: samples must be >= 1");
  if (sampler.dim() != grid.dim()) throw NumericError("distortion: sampler dimension mismatch");
  NnIndex index(grid, backend);
  std::vector<double> x(static_cast<std::size_t>(grid.dim()));
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t m = 0; m < samples; ++m) {
    sampler.sample(g, x);
    const std::size_t i = index.nearest(x);
    const double d2 = squared_distance(x, grid.point(i));
    sum += d2;
    sum_sq += d2 * d2;
  }
  const double mean = sum / static_cast<double>(samples);
  const double var = std::max(0.0, sum_sq / static_cast<double>(samples) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

struct LloydResult {
  QuantGrid grid;
  std::vector<double> distortion;  // per-iteration estimate, under the old centers
};

/// Randomized Lloyd fixed point: centers start from distinct samples; each
/// iteration assigns a fresh batch to its nearest center and recenters every
/// non-empty cell at its sample mean. Empty cells keep their point, which
/// keeps the whole build a pure function of the stream.
template <PointSampler S>
LloydResult lloyd_build(const S& sampler, std::size_t n_points, int dim, int iterations,
                        std::uint64_t samples_per_iter, rng::RngStream& g,
                        NnBackend backend = NnBackend::KdTree) {
  if (n_points == 0) throw std::invalid_argument("lloyd_build: need at least one center");
  if (iterations < 0) throw std::invalid_argument("lloyd_build: iterations must be >= 0");
  if (sampler.dim() != dim) throw NumericError("lloyd_build: sampler dimension mismatch");
  const std::size_t d = static_cast<std::size_t>(dim);

  std::vector<double> centers;
  centers.reserve(n_points * d);
  std::vector<double> x(d);
  std::uint64_t attempts = 0;
  while (centers.size() < n_points * d) {
    sampler.sample(g, x);
    bool dup = false;
    for (std::size_t i = 0; i < centers.size() / d && !dup; ++i)
      dup = std::equal(x.begin(), x.end(), centers.begin() + static_cast<std::ptrdiff_t>(i * d));
    if (!dup) centers.insert(centers.end(), x.begin(), x.end());
    if (++attempts > 100 * n_points + 100)
      throw NumericError("lloyd_build: sampler cannot produce enough distinct centers");
  }

  LloydResult result;
  std::vector<double> sums(n_points * d);
  std::vector<std::uint64_t> counts(n_points);
  for (int it = 0; it < iterations; ++it) {
    QuantGrid snapshot(dim, centers);
    NnIndex index(snapshot, backend);
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), std::uint64_t{0});
    double dist_sum = 0.0;
    for (std::uint64_t m = 0; m < samples_per_iter; ++m) {
      sampler.sample(g, x);
      const std::size_t i = index.nearest(x);
      ++counts[i];
      for (std::size_t j = 0; j < d; ++j) sums[i * d + j] += x[j];
      dist_sum += squared_distance(x, snapshot.point(i));
    }
    result.distortion.push_back(dist_sum / static_cast<double>(samples_per_iter));
    for (std::size_t i = 0; i < n_points; ++i) {
      if (counts[i] == 0) continue;
      for (std::size_t j = 0; j < d; ++j)
        centers[i * d + j] = sums[i * d + j] / static_cast<double>(counts[i]);
    }
  }
  result.grid = QuantGrid(dim, std::move(centers));
  return result;
}

/// Standard-normal product sampler, the workhorse target for grid building.
struct GaussianSampler {
  int dimension = 1;
  int dim() const { return dimension; }
  void sample(rng::RngStream& g, std::span<double> out) const {
    for (auto& v : out) v = g.next_gaussian();
  }
};

}  // namespace qtree::quant
