#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qtree/quant/grid.hpp"

namespace qtree::quant {

enum class NnBackend { BruteForce, KdTree };

/// Exact nearest neighbor by linear scan; ties resolve to the smallest index.
inline std::size_t nearest_brute(const QuantGrid& g, std::span<const double> q) {
  if (static_cast<int>(q.size()) != g.dim())
    throw std::invalid_argument("nearest: query dimension mismatch");
  const double* pts = g.data().data();
  const std::size_t n = g.size();
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  if (g.dim() == 2) {
    const double qx = q[0], qy = q[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = qx - pts[2 * i];
      const double dy = qy - pts[2 * i + 1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    return best;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = squared_distance(q, g.point(i));
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

/// Balanced kd-tree over a grid. Splits on the widest-spread coordinate at
/// the median point; leaves hold up to `leaf_size` points. Queries are exact
/// and agree with the brute-force scan under the smallest-index tie rule.
class KdTree {
 public:
  struct Node {
    int split_dim = -1;  // -1 marks a leaf
    double split_val = 0.0;
    std::int32_t left = -1, right = -1;
    std::uint32_t begin = 0, end = 0;  // leaf range into perm
  };

  explicit KdTree(const QuantGrid& g, int leaf_size = 8) : grid_(&g), leaf_size_(leaf_size) {
    if (leaf_size_ < 1) throw std::invalid_argument("KdTree: leaf_size must be >= 1");
    perm_.resize(g.size());
    for (std::uint32_t i = 0; i < perm_.size(); ++i) perm_[i] = i;
    nodes_.reserve(2 * g.size() / static_cast<std::size_t>(leaf_size_) + 4);
    build(0, static_cast<std::uint32_t>(perm_.size()));
  }

  std::size_t nearest(std::span<const double> q) const {
    if (static_cast<int>(q.size()) != grid_->dim())
      throw std::invalid_argument("nearest: query dimension mismatch");
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(0, q, best, best_d2);
    return best;
  }

  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  double coord(std::uint32_t pt, int d) const {
    return grid_->data()[static_cast<std::size_t>(pt) * grid_->dim() + d];
  }

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= static_cast<std::uint32_t>(leaf_size_)) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    // Widest empirical spread picks the split dimension (smallest dim wins ties).
    int dim = 0;
    double best_spread = -1.0;
    for (int d = 0; d < grid_->dim(); ++d) {
      double lo = coord(perm_[begin], d), hi = lo;
      for (std::uint32_t i = begin + 1; i < end; ++i) {
        const double v = coord(perm_[i], d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        dim = d;
      }
    }
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return coord(a, dim) < coord(b, dim); });
    const double split = coord(perm_[mid], dim);
    nodes_[id].split_dim = dim;
    nodes_[id].split_val = split;
    const std::int32_t l = build(begin, mid);
    const std::int32_t r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(std::int32_t id, std::span<const double> q, std::size_t& best,
              double& best_d2) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.split_dim < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t pt = perm_[i];
        const double d2 = squared_distance(q, grid_->point(pt));
        if (d2 < best_d2 || (d2 == best_d2 && pt < best)) {
          best_d2 = d2;
          best = pt;
        }
      }
      return;
    }
    const double diff = q[static_cast<std::size_t>(node.split_dim)] - node.split_val;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, best, best_d2);
    // Equality must still descend: an equally distant smaller index may hide
    // on the far side of the plane.
    if (diff * diff <= best_d2) search(far, q, best, best_d2);
  }

  const QuantGrid* grid_;
  int leaf_size_;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
};

/// Backend-dispatching query handle; holds a non-owning grid reference.
class NnIndex {
 public:
  NnIndex(const QuantGrid& g, NnBackend backend, int leaf_size = 8)
      : grid_(&g), backend_(backend) {
    if (backend == NnBackend::KdTree) kd_.emplace(g, leaf_size);
  }

  NnBackend backend() const { return backend_; }

  std::size_t nearest(std::span<const double> q) const {
    return backend_ == NnBackend::KdTree ? kd_->nearest(q) : nearest_brute(*grid_, q);
  }

 private:
  const QuantGrid* grid_;
  NnBackend backend_;
  std::optional<KdTree> kd_;
};

/// One-off query; prefer NnIndex when querying the same grid repeatedly
/// (the kd-tree is rebuilt on every call here).
inline std::size_t nearest(const QuantGrid& g, std::span<const double> q, NnBackend backend) {
  if (backend == NnBackend::KdTree) return KdTree(g).nearest(q);
  return nearest_brute(g, q);
}

}  // namespace qtree::quant
