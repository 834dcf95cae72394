#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>

#include "qtree/rng/lcg48.hpp"
#include "qtree/rng/mrg32k3a.hpp"
#include "qtree/rng/xorwow.hpp"

namespace qtree::rng {

enum class EngineKind { Lcg48, Mrg32k3a, Xorwow };

inline const char* engine_name(EngineKind k) {
  switch (k) {
    case EngineKind::Lcg48: return "lcg48";
    case EngineKind::Mrg32k3a: return "mrg32k3a";
    case EngineKind::Xorwow: return "xorwow";
  }
  return "?";
}

enum class PartitionMode { Block, SkipAhead };

/// How a serial sequence is divided among parallel streams.
///
/// SkipAhead: stream i of s emits the serial draws i, i+s, i+2s, ...
/// Block:     stream i emits the contiguous draws [i*block_size, (i+1)*block_size).
///            Xorwow cannot jump, so its block streams are independently
///            seeded from (seed, stream_index) plus a burn-in instead.
struct StreamPartition {
  PartitionMode mode = PartitionMode::Block;
  std::uint64_t stream_count = 1;
  std::uint64_t stream_index = 0;
  std::uint64_t block_size = 1;       // Block mode only
  std::uint64_t xorwow_burnin = 64;   // Block mode, Xorwow only

  void validate() const {
    if (stream_count == 0) throw std::invalid_argument("partition: stream_count must be positive");
    if (stream_index >= stream_count)
      throw std::invalid_argument("partition: stream_index must be < stream_count");
    if (mode == PartitionMode::Block && block_size == 0)
      throw std::invalid_argument("partition: block_size must be positive");
  }
};

struct GaussianPair {
  double z1, z2;
};

/// Box-Muller transform of two uniforms. Consumes exactly the pair given;
/// u1 = 0 (possible for lcg48/xorwow) is clamped to keep the log finite.
inline GaussianPair box_muller(double u1, double u2) {
  if (u1 <= 0.0) u1 = 0x1p-64;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

/// A single-owner random stream: engine state plus partition bookkeeping.
/// Distinct streams share no mutable state and may run on distinct threads.
class RngStream {
 public:
  RngStream() : engine_(Lcg48State{}) {}
  explicit RngStream(Lcg48State s) : engine_(s) {}
  explicit RngStream(Mrg32k3aState s) : engine_(s) {}
  explicit RngStream(XorwowState s) : engine_(s) {}

  EngineKind kind() const {
    if (std::holds_alternative<Lcg48State>(engine_)) return EngineKind::Lcg48;
    if (std::holds_alternative<Mrg32k3aState>(engine_)) return EngineKind::Mrg32k3a;
    return EngineKind::Xorwow;
  }

  const StreamPartition& partition() const { return partition_; }

  double next_uniform() {
    double u;
    if (auto* lcg = std::get_if<Lcg48State>(&engine_)) {
      u = lcg48_next(*lcg);
      if (interleaved_) lcg_jump_.apply(*lcg);
    } else if (auto* mrg = std::get_if<Mrg32k3aState>(&engine_)) {
      u = mrg32k3a_next(*mrg);
      if (interleaved_) mrg_jump_.apply(*mrg);
    } else {
      u = xorwow_next_uniform(std::get<XorwowState>(engine_));
    }
    return u;
  }

  /// Standard normal via Box-Muller on consecutive uniforms; every second
  /// call is served from the cached mate of the previous pair.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const GaussianPair p = box_muller(u1, u2);
    spare_ = p.z2;
    has_spare_ = true;
    return p.z1;
  }

  /// Drops a cached Box-Muller mate, realigning the stream with its raw
  /// uniform sequence (used at path boundaries).
  void clear_gaussian_spare() { has_spare_ = false; }

 private:
  friend RngStream split_stream(EngineKind, std::uint64_t, const StreamPartition&);
  friend class PathStreamer;

  std::variant<Lcg48State, Mrg32k3aState, XorwowState> engine_;
  StreamPartition partition_{};
  // Per-draw jump over the other streams' draws (skip-ahead mode, s > 1).
  Lcg48Jump lcg_jump_{};
  Mrg32k3aJump mrg_jump_{};
  bool interleaved_ = false;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {
inline std::variant<Lcg48State, Mrg32k3aState, XorwowState> seed_engine(EngineKind kind,
                                                                        std::uint64_t seed) {
  switch (kind) {
    case EngineKind::Lcg48: return lcg48_seed(seed);
    case EngineKind::Mrg32k3a: return mrg32k3a_seed(seed);
    case EngineKind::Xorwow: return xorwow_seed(seed);
  }
  throw std::invalid_argument("unknown engine kind");
}
}  // namespace detail

/// Creates stream `partition.stream_index` of the partitioned sequence with
/// the given master seed. Skip-ahead is available for the jumpable engines
/// (lcg48, mrg32k3a); block mode for all three.
inline RngStream split_stream(EngineKind kind, std::uint64_t seed,
                              const StreamPartition& partition) {
  partition.validate();
  if (kind == EngineKind::Xorwow) {
    if (partition.mode == PartitionMode::SkipAhead)
      throw std::invalid_argument("split_stream: skip-ahead is unsupported for xorwow");
    XorwowState s = xorwow_seed(seed, partition.stream_index);
    for (std::uint64_t i = 0; i < partition.xorwow_burnin; ++i) xorwow_next(s);
    RngStream st(s);
    st.partition_ = partition;
    return st;
  }

  const std::uint64_t offset = partition.mode == PartitionMode::SkipAhead
                                   ? partition.stream_index
                                   : partition.stream_index * partition.block_size;
  RngStream st;
  st.engine_ = detail::seed_engine(kind, seed);
  st.partition_ = partition;
  if (kind == EngineKind::Lcg48) {
    auto& e = std::get<Lcg48State>(st.engine_);
    lcg48_skip(e, offset);
    if (partition.mode == PartitionMode::SkipAhead && partition.stream_count > 1) {
      st.lcg_jump_ = lcg48_skip_coefficients(e.a, e.c, partition.stream_count - 1);
      st.interleaved_ = true;
    }
  } else {
    auto& e = std::get<Mrg32k3aState>(st.engine_);
    mrg32k3a_skip(e, offset);
    if (partition.mode == PartitionMode::SkipAhead && partition.stream_count > 1) {
      st.mrg_jump_ = mrg32k3a_skip_coefficients(partition.stream_count - 1);
      st.interleaved_ = true;
    }
  }
  return st;
}

/// Hands out consecutive fixed-length block substreams ("one per path")
/// in O(1) per stream after the initial positioning.
class PathStreamer {
 public:
  PathStreamer(EngineKind kind, std::uint64_t seed, std::uint64_t draws_per_path,
               std::uint64_t first_path, std::uint64_t path_count)
      : kind_(kind), seed_(seed), draws_(draws_per_path), next_path_(first_path),
        path_count_(path_count) {
    if (draws_per_path == 0)
      throw std::invalid_argument("PathStreamer: draws_per_path must be positive");
    if (kind_ != EngineKind::Xorwow) {
      engine_ = detail::seed_engine(kind, seed);
      if (auto* lcg = std::get_if<Lcg48State>(&engine_)) {
        lcg48_skip(*lcg, first_path * draws_per_path);
        jump_lcg_ = lcg48_skip_coefficients(lcg->a, lcg->c, draws_per_path);
      } else {
        auto& mrg = std::get<Mrg32k3aState>(engine_);
        mrg32k3a_skip(mrg, first_path * draws_per_path);
        jump_mrg_ = mrg32k3a_skip_coefficients(draws_per_path);
      }
    }
  }

  /// Stream for the next path; identical to
  /// split_stream(kind, seed, {Block, path_count, path, draws_per_path}).
  RngStream next_path() {
    RngStream st;
    if (kind_ == EngineKind::Xorwow) {
      StreamPartition p{PartitionMode::Block, path_count_, next_path_, draws_};
      st = split_stream(kind_, seed_, p);
    } else {
      st.engine_ = engine_;
      st.partition_ = StreamPartition{PartitionMode::Block, path_count_, next_path_, draws_};
      if (auto* lcg = std::get_if<Lcg48State>(&engine_))
        jump_lcg_.apply(*lcg);
      else
        jump_mrg_.apply(std::get<Mrg32k3aState>(engine_));
    }
    ++next_path_;
    return st;
  }

 private:
  EngineKind kind_;
  std::uint64_t seed_;
  std::uint64_t draws_;
  std::uint64_t next_path_;
  std::uint64_t path_count_;
  std::variant<Lcg48State, Mrg32k3aState, XorwowState> engine_{Lcg48State{}};
  Lcg48Jump jump_lcg_{};
  Mrg32k3aJump jump_mrg_{};
};

}  // namespace qtree::rng
