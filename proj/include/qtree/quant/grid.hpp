#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qtree/errors.hpp"

namespace qtree::quant {

/// One time-layer codebook: N points in R^d, Euclidean norm.
/// Immutable after construction; concurrent reads are safe.
class QuantGrid {
 public:
  QuantGrid() = default;

  QuantGrid(int dim, std::vector<double> points) : dim_(dim), pts_(std::move(points)) {
    if (dim_ < 1) throw NumericError("grid: dimension must be >= 1");
    if (pts_.empty() || pts_.size() % static_cast<std::size_t>(dim_) != 0)
      throw NumericError("grid: point data size is not a positive multiple of dim");
    for (double v : pts_)
      if (!std::isfinite(v)) throw NumericError("grid: non-finite point coordinate");
    check_distinct();
  }

  int dim() const { return dim_; }
  std::size_t size() const { return pts_.size() / static_cast<std::size_t>(dim_); }

  std::span<const double> point(std::size_t i) const {
    return {pts_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> data() const { return pts_; }

  bool operator==(const QuantGrid& o) const { return dim_ == o.dim_ && pts_ == o.pts_; }

 private:
  void check_distinct() const {
    const std::size_t n = size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
      auto pa = point(a), pb = point(b);
      return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < n; ++i) {
      auto pa = point(order[i - 1]), pb = point(order[i]);
      if (std::equal(pa.begin(), pa.end(), pb.begin())) throw NumericError("grid: duplicate points");
    }
  }

  int dim_ = 0;
  std::vector<double> pts_;
};

/// Squared Euclidean distance, accumulated in coordinate order so that all
/// backends produce bit-identical values (ties included).
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

namespace detail {
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// Text format: line 1 "N d", then N lines of d floats at 17 significant
/// digits (lossless for IEEE doubles).
inline void save_grid(const QuantGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_grid: cannot open " + path.string());
  out << g.size() << ' ' << g.dim() << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto p = g.point(i);
    for (int j = 0; j < g.dim(); ++j) {
      if (j) out << ' ';
      out << detail::format_double(p[static_cast<std::size_t>(j)]);
    }
    out << '\n';
  }
  if (!out) throw IoError("save_grid: write failed for " + path.string());
}

inline QuantGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_grid: cannot open " + path.string());
  std::size_t n = 0;
  int d = 0;
  if (!(in >> n >> d) || n == 0 || d < 1)
    throw IoError("load_grid: malformed header in " + path.string());
  std::vector<double> pts(n * static_cast<std::size_t>(d));
  for (auto& v : pts)
    if (!(in >> v)) throw IoError("load_grid: expected " + std::to_string(n) + " rows of " +
                                  std::to_string(d) + " values in " + path.string());
  double extra;
  if (in >> extra) throw IoError("load_grid: trailing data in " + path.string());
  try {
    return QuantGrid(d, std::move(pts));
  } catch (const NumericError& e) {
    throw IoError("load_grid: " + std::string(e.what()) + " in " + path.string());
  }
}

}  // namespace qtree::quant
