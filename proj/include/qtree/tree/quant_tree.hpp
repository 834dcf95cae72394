#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qtree/errors.hpp"
#include "qtree/quant/grid.hpp"

namespace qtree::tree {

/// Integer tally of one estimation run: per-layer visit counts plus, per
/// transition k (layer k-1 -> k), the joint counts p^k_{ij}. Workers
/// accumulate into private sets and merge after the barrier.
struct CountMatrixSet {
  std::vector<std::vector<std::uint64_t>> visits;  // layer 0..n
  std::vector<std::vector<std::uint64_t>> joint;   // transition 1..n, row-major N_{k-1} x N_k

  static CountMatrixSet zeros(std::span<const std::size_t> layer_sizes) {
    CountMatrixSet cs;
    cs.visits.resize(layer_sizes.size());
    for (std::size_t k = 0; k < layer_sizes.size(); ++k)
      cs.visits[k].assign(layer_sizes[k], 0);
    cs.joint.resize(layer_sizes.size() - 1);
    for (std::size_t k = 1; k < layer_sizes.size(); ++k)
      cs.joint[k - 1].assign(layer_sizes[k - 1] * layer_sizes[k], 0);
    return cs;
  }

  void add(const CountMatrixSet& o) {
    for (std::size_t k = 0; k < visits.size(); ++k)
      for (std::size_t i = 0; i < visits[k].size(); ++i) visits[k][i] += o.visits[k][i];
    for (std::size_t k = 0; k < joint.size(); ++k)
      for (std::size_t i = 0; i < joint[k].size(); ++i) joint[k][i] += o.joint[k][i];
  }
};

/// Grids for layers 0..n plus the estimated transition matrices pi^k
/// (N_{k-1} x N_k, row-stochastic on every visited row). Rows whose source
/// cell was never visited stay all-zero and report !row_visited().
class QuantTree {
 public:
  std::vector<quant::QuantGrid> grids;            // n+1 grids
  CountMatrixSet counts;
  std::vector<std::vector<double>> pi;            // transition 1..n, row-major
  std::uint64_t samples = 0;                      // M

  int layers() const { return static_cast<int>(pi.size()); }
  std::size_t layer_size(int k) const { return grids[static_cast<std::size_t>(k)].size(); }

  /// Source-cell visit count of transition k, i.e. visits of layer k-1.
  std::uint64_t row_count(int k, std::size_t i) const {
    return counts.visits[static_cast<std::size_t>(k - 1)][i];
  }
  bool row_visited(int k, std::size_t i) const { return row_count(k, i) > 0; }

  /// Row i of pi^k (transition from layer k-1 into layer k), k in [1, n].
  std::span<const double> pi_row(int k, std::size_t i) const {
    const std::size_t cols = layer_size(k);
    return {pi[static_cast<std::size_t>(k - 1)].data() + i * cols, cols};
  }

  /// Fills pi from the counts; zero-visit rows are left all-zero.
  void normalize() {
    pi.resize(counts.joint.size());
    for (std::size_t t = 0; t < counts.joint.size(); ++t) {
      const std::size_t rows = counts.visits[t].size();
      const std::size_t cols = counts.joint[t].size() / rows;
      pi[t].assign(rows * cols, 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        const std::uint64_t denom = counts.visits[t][i];
        if (denom == 0) continue;
        for (std::size_t j = 0; j < cols; ++j)
          pi[t][i * cols + j] =
              static_cast<double>(counts.joint[t][i * cols + j]) / static_cast<double>(denom);
      }
    }
  }
};

namespace detail {

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void read_pod(std::istream& in, T& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("tree file: truncated");
}

template <class T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
void read_vec(std::istream& in, std::vector<T>& v, std::size_t n) {
  v.resize(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))))
    throw IoError("tree file: truncated");
}

inline std::string grid_text(const quant::QuantGrid& g) {
  std::ostringstream os;
  os << g.size() << ' ' << g.dim() << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto p = g.point(i);
    for (int j = 0; j < g.dim(); ++j) {
      if (j) os << ' ';
      os << quant::detail::format_double(p[static_cast<std::size_t>(j)]);
    }
    os << '\n';
  }
  return os.str();
}

inline quant::QuantGrid grid_from_text(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  int d = 0;
  if (!(in >> n >> d) || n == 0 || d < 1) throw IoError("tree file: malformed embedded grid");
  std::vector<double> pts(n * static_cast<std::size_t>(d));
  for (auto& v : pts)
    if (!(in >> v)) throw IoError("tree file: malformed embedded grid");
  return quant::QuantGrid(d, std::move(pts));
}

}  // namespace detail

inline constexpr char kTreeMagic[4] = {'Q', 'T', 'R', 'E'};
inline constexpr std::uint32_t kTreeVersion = 1;

/// Binary little-endian tree file: "QTRE", version, n, M, the n+1 grids as
/// length-prefixed text blocks, the per-layer visit counts, then per
/// transition the dimensions, joint counts (u64) and pi (f64). Round trips
/// are bit-exact.
inline void save_tree(const QuantTree& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_tree: cannot open " + path.string());
  out.write(kTreeMagic, 4);
  detail::write_pod(out, kTreeVersion);
  detail::write_pod(out, static_cast<std::uint32_t>(t.layers()));
  detail::write_pod(out, t.samples);
  for (const auto& g : t.grids) {
    const std::string text = detail::grid_text(g);
    detail::write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
  }
  for (std::size_t k = 0; k < t.counts.visits.size(); ++k)
    detail::write_vec(out, t.counts.visits[k]);
  for (int k = 1; k <= t.layers(); ++k) {
    detail::write_pod(out, static_cast<std::uint64_t>(t.layer_size(k - 1)));
    detail::write_pod(out, static_cast<std::uint64_t>(t.layer_size(k)));
    detail::write_vec(out, t.counts.joint[static_cast<std::size_t>(k - 1)]);
    detail::write_vec(out, t.pi[static_cast<std::size_t>(k - 1)]);
  }
  if (!out) throw IoError("save_tree: write failed for " + path.string());
}

inline QuantTree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_tree: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kTreeMagic, 4) != 0)
    throw IoError("load_tree: bad magic in " + path.string());
  std::uint32_t version = 0;
  detail::read_pod(in, version);
  if (version != kTreeVersion)
    throw IoError("load_tree: unsupported version " + std::to_string(version));
  std::uint32_t n = 0;
  detail::read_pod(in, n);
  if (n == 0) throw IoError("load_tree: empty tree");
  QuantTree t;
  detail::read_pod(in, t.samples);
  t.grids.reserve(n + 1);
  for (std::uint32_t k = 0; k <= n; ++k) {
    std::uint64_t len = 0;
    detail::read_pod(in, len);
    std::string text(len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(len)))
      throw IoError("tree file: truncated");
    t.grids.push_back(detail::grid_from_text(text));
  }
  t.counts.visits.resize(n + 1);
  for (std::uint32_t k = 0; k <= n; ++k)
    detail::read_vec(in, t.counts.visits[k], t.grids[k].size());
  t.counts.joint.resize(n);
  t.pi.resize(n);
  for (std::uint32_t k = 1; k <= n; ++k) {
    std::uint64_t rows = 0, cols = 0;
    detail::read_pod(in, rows);
    detail::read_pod(in, cols);
    if (rows != t.grids[k - 1].size() || cols != t.grids[k].size())
      throw IoError("load_tree: transition dimensions disagree with grids");
    detail::read_vec(in, t.counts.joint[k - 1], rows * cols);
    detail::read_vec(in, t.pi[k - 1], rows * cols);
  }
  return t;
}

}  // namespace qtree::tree
