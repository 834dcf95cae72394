#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qtree/model/chains.hpp"
#include "qtree/quant/nn.hpp"
#include "qtree/rng/stream.hpp"
#include "qtree/tree/quant_tree.hpp"

namespace qtree::tree {

enum class EstimatorKind { AlgI, AlgII, AlgIII };

/// Wall-clock attribution of one tree build. In parallel runs the loop
/// phases come from the busiest worker, so they never exceed the total.
struct BuildPhases {
  double simulate_ms = 0.0;
  double nn_ms = 0.0;
  double merge_ms = 0.0;
  double normalize_ms = 0.0;
  double total_ms = 0.0;
};

struct EstimateOptions {
  rng::EngineKind engine = rng::EngineKind::Mrg32k3a;
  std::uint64_t seed = 12345;
  int workers = 1;
  quant::NnBackend nn = quant::NnBackend::BruteForce;
  BuildPhases* phases = nullptr;  // optional timing sink
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Uniforms reserved per path: every Box-Muller pair costs two uniforms and
/// any dangling mate is dropped at the path boundary.
inline std::uint64_t uniforms_per_path(std::uint64_t normals) {
  return 2 * ((normals + 1) / 2);
}

template <class Chain>
std::vector<std::size_t> layer_sizes(const Chain& chain,
                                     std::span<const quant::QuantGrid> grids) {
  if (static_cast<int>(grids.size()) != chain.layers())
    throw std::invalid_argument("estimate: need one grid per layer 1..n");
  for (const auto& g : grids)
    if (g.dim() != chain.dim()) throw std::invalid_argument("estimate: grid dimension mismatch");
  std::vector<std::size_t> sizes;
  sizes.reserve(grids.size() + 1);
  sizes.push_back(1);  // layer 0 is the singleton {x_0}
  for (const auto& g : grids) sizes.push_back(g.size());
  return sizes;
}

template <class Chain>
QuantTree make_tree_shell(const Chain& chain, std::span<const quant::QuantGrid> grids) {
  QuantTree t;
  std::vector<double> x0(static_cast<std::size_t>(chain.dim()));
  chain.initial(x0);
  t.grids.reserve(grids.size() + 1);
  t.grids.emplace_back(chain.dim(), x0);
  for (const auto& g : grids) t.grids.push_back(g);
  return t;
}

inline std::vector<quant::NnIndex> build_indices(std::span<const quant::QuantGrid> grids,
                                                 quant::NnBackend backend) {
  std::vector<quant::NnIndex> idx;
  idx.reserve(grids.size());
  for (const auto& g : grids) idx.emplace_back(g, backend);
  return idx;
}

/// Path loop shared by Algorithms I and II: path m owns the m-th fixed-size
/// block substream, is simulated layer by layer, and tallies the visited
/// (cell at k-1, cell at k) pair per transition.
template <class Chain>
void accumulate_paths(const Chain& chain, std::span<const quant::NnIndex> indices,
                      std::span<const std::size_t> sizes, rng::EngineKind engine,
                      std::uint64_t seed, std::uint64_t first_path, std::uint64_t path_count,
                      std::uint64_t total_paths, CountMatrixSet& cs, double* simulate_ms,
                      double* nn_ms) {
  const int n = chain.layers();
  const std::size_t d = static_cast<std::size_t>(chain.dim());
  const int nps = chain.normals_per_step();
  const std::uint64_t normals = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(nps);
  rng::PathStreamer streams(engine, seed, uniforms_per_path(normals), first_path, total_paths);

  std::vector<double> eps(normals);
  std::vector<double> x(d), xn(d);
  double sim_ms = 0.0, search_ms = 0.0;
  for (std::uint64_t m = 0; m < path_count; ++m) {
    rng::RngStream g = streams.next_path();
    const auto t0 = Clock::now();
    for (auto& e : eps) e = g.next_gaussian();
    const auto t1 = Clock::now();
    sim_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();

    chain.initial(x);
    std::size_t i = 0;
    ++cs.visits[0][0];
    for (int k = 1; k <= n; ++k) {
      const std::size_t t = static_cast<std::size_t>(k - 1);
      chain.step(k - 1, x, xn, std::span<const double>(eps.data() + t * nps, nps));
      x.swap(xn);
      const std::size_t j = indices[t].nearest(x);
      cs.joint[t][i * sizes[static_cast<std::size_t>(k)] + j] += 1;
      ++cs.visits[static_cast<std::size_t>(k)][j];
      i = j;
    }
    search_ms += ms_since(t1);
  }
  if (simulate_ms) *simulate_ms = sim_ms;
  if (nn_ms) *nn_ms = search_ms;
}

}  // namespace detail

/// Algorithm I: single-threaded pathwise estimation. Simulate each path with
/// the exact AR(1) recursion, project every layer onto its grid, count the
/// transitions, and normalize rows by the source-cell visit counts.
template <model::MarkovChain Chain>
QuantTree estimate_alg1(const Chain& chain, std::span<const quant::QuantGrid> grids,
                        std::uint64_t paths, const EstimateOptions& opt = {}) {
  if (paths == 0) throw std::invalid_argument("estimate: need at least one path");
  const auto t0 = detail::Clock::now();
  const auto sizes = detail::layer_sizes(chain, grids);
  QuantTree t = detail::make_tree_shell(chain, grids);
  t.samples = paths;
  t.counts = CountMatrixSet::zeros(sizes);
  const auto indices = detail::build_indices(grids, opt.nn);

  double sim_ms = 0.0, nn_ms = 0.0;
  detail::accumulate_paths(chain, indices, sizes, opt.engine, opt.seed, 0, paths, paths,
                           t.counts, &sim_ms, &nn_ms);
  const auto tn = detail::Clock::now();
  t.normalize();
  if (opt.phases) {
    opt.phases->simulate_ms = sim_ms;
    opt.phases->nn_ms = nn_ms;
    opt.phases->merge_ms = 0.0;
    opt.phases->normalize_ms = detail::ms_since(tn);
    opt.phases->total_ms = detail::ms_since(t0);
  }
  return t;
}

/// Algorithm II: pathwise-parallel estimation. Workers own contiguous path
/// blocks and private counter sets; the merge after the join barrier plays
/// the role of the atomic adds, so the counts are bit-identical to
/// Algorithm I for any worker count.
template <model::MarkovChain Chain>
QuantTree estimate_alg2(const Chain& chain, std::span<const quant::QuantGrid> grids,
                        std::uint64_t paths, const EstimateOptions& opt = {}) {
  if (opt.workers < 1) throw std::invalid_argument("estimate_alg2: workers must be >= 1");
  if (paths == 0) throw std::invalid_argument("estimate: need at least one path");
  const auto t0 = detail::Clock::now();
  const auto sizes = detail::layer_sizes(chain, grids);
  QuantTree t = detail::make_tree_shell(chain, grids);
  t.samples = paths;
  const auto indices = detail::build_indices(grids, opt.nn);

  const std::uint64_t workers = std::min<std::uint64_t>(static_cast<std::uint64_t>(opt.workers), paths);
  std::vector<CountMatrixSet> partial(workers);
  std::vector<double> sim_ms(workers, 0.0), nn_ms(workers, 0.0);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t begin = paths * w / workers;
    const std::uint64_t end = paths * (w + 1) / workers;
    partial[w] = CountMatrixSet::zeros(sizes);
    pool.emplace_back([&, w, begin, end] {
      detail::accumulate_paths(chain, indices, sizes, opt.engine, opt.seed, begin, end - begin,
                               paths, partial[w], &sim_ms[w], &nn_ms[w]);
    });
  }
  for (auto& th : pool) th.join();

  const auto tm = detail::Clock::now();
  t.counts = CountMatrixSet::zeros(sizes);
  for (const auto& p : partial) t.counts.add(p);
  const auto tn = detail::Clock::now();
  t.normalize();

  if (opt.phases) {
    std::size_t busiest = 0;
    for (std::size_t w = 1; w < workers; ++w)
      if (sim_ms[w] + nn_ms[w] > sim_ms[busiest] + nn_ms[busiest]) busiest = w;
    opt.phases->simulate_ms = sim_ms[busiest];
    opt.phases->nn_ms = nn_ms[busiest];
    opt.phases->merge_ms = std::chrono::duration<double, std::milli>(tn - tm).count();
    opt.phases->normalize_ms = detail::ms_since(tn);
    opt.phases->total_ms = detail::ms_since(t0);
  }
  return t;
}

/// Algorithm III: layer-parallel estimation. Each transition k draws fresh
/// samples of (X_{k-1}, eps) directly from the exact marginal law, so layers
/// are independent work items touching only grids k-1 and k. Costs twice the
/// draws and searches of Algorithm I but has no cross-layer dependency.
template <model::MarkovChain Chain>
QuantTree estimate_alg3(const Chain& chain, std::span<const quant::QuantGrid> grids,
                        std::uint64_t samples_per_layer, const EstimateOptions& opt = {}) {
  if (opt.workers < 1) throw std::invalid_argument("estimate_alg3: workers must be >= 1");
  if (samples_per_layer == 0) throw std::invalid_argument("estimate: need at least one sample");
  const auto t0 = detail::Clock::now();
  const auto sizes = detail::layer_sizes(chain, grids);
  QuantTree t = detail::make_tree_shell(chain, grids);
  t.samples = samples_per_layer;
  t.counts = CountMatrixSet::zeros(sizes);
  const auto indices = detail::build_indices(grids, opt.nn);

  const int n = chain.layers();
  const std::size_t d = static_cast<std::size_t>(chain.dim());
  const int nps = chain.normals_per_step();
  const std::uint64_t normals =
      static_cast<std::uint64_t>(chain.dim()) + static_cast<std::uint64_t>(nps);
  const std::uint64_t draws = detail::uniforms_per_path(normals);
  const std::uint64_t total_samples = static_cast<std::uint64_t>(n) * samples_per_layer;

  std::atomic<int> next_task{1};
  std::vector<double> sim_ms(static_cast<std::size_t>(opt.workers), 0.0);
  std::vector<double> nn_ms(static_cast<std::size_t>(opt.workers), 0.0);

  auto run_worker = [&](int worker) {
    std::vector<double> eps(normals);
    std::vector<double> x(d), xn(d);
    for (;;) {
      const int k = next_task.fetch_add(1);
      if (k > n) return;
      const std::size_t tk = static_cast<std::size_t>(k - 1);
      auto& joint = t.counts.joint[tk];
      auto& src = t.counts.visits[tk];
      const std::size_t cols = sizes[static_cast<std::size_t>(k)];
      rng::PathStreamer streams(opt.engine, opt.seed, draws,
                                tk * samples_per_layer, total_samples);
      for (std::uint64_t m = 0; m < samples_per_layer; ++m) {
        rng::RngStream g = streams.next_path();
        const auto s0 = detail::Clock::now();
        for (auto& e : eps) e = g.next_gaussian();
        chain.sample_marginal(k - 1, x, std::span<const double>(eps.data(), d));
        chain.step(k - 1, x, xn, std::span<const double>(eps.data() + d, static_cast<std::size_t>(nps)));
        const auto s1 = detail::Clock::now();
        sim_ms[static_cast<std::size_t>(worker)] +=
            std::chrono::duration<double, std::milli>(s1 - s0).count();
        const std::size_t i = k - 1 == 0 ? 0 : indices[tk - 1].nearest(x);
        const std::size_t j = indices[tk].nearest(xn);
        joint[i * cols + j] += 1;
        ++src[i];
        nn_ms[static_cast<std::size_t>(worker)] += detail::ms_since(s1);
      }
    }
  };

  std::vector<std::thread> pool;
  const int workers = std::min(opt.workers, n);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
  for (auto& th : pool) th.join();

  // The final layer's visits are the landing counts of the last transition.
  const auto tm = detail::Clock::now();
  {
    auto& last = t.counts.visits[static_cast<std::size_t>(n)];
    const auto& joint = t.counts.joint[static_cast<std::size_t>(n - 1)];
    const std::size_t cols = sizes[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < sizes[static_cast<std::size_t>(n - 1)]; ++i)
      for (std::size_t j = 0; j < cols; ++j) last[j] += joint[i * cols + j];
  }
  const auto tn = detail::Clock::now();
  t.normalize();

  if (opt.phases) {
    std::size_t busiest = 0;
    for (std::size_t w = 1; w < sim_ms.size(); ++w)
      if (sim_ms[w] + nn_ms[w] > sim_ms[busiest] + nn_ms[busiest]) busiest = w;
    opt.phases->simulate_ms = sim_ms[busiest];
    opt.phases->nn_ms = nn_ms[busiest];
    opt.phases->merge_ms = std::chrono::duration<double, std::milli>(tn - tm).count();
    opt.phases->normalize_ms = detail::ms_since(tn);
    opt.phases->total_ms = detail::ms_since(t0);
  }
  return t;
}

/// Dispatch by estimator kind (workers are ignored by Algorithm I).
template <model::MarkovChain Chain>
QuantTree estimate(EstimatorKind kind, const Chain& chain,
                   std::span<const quant::QuantGrid> grids, std::uint64_t paths,
                   const EstimateOptions& opt = {}) {
  switch (kind) {
    case EstimatorKind::AlgI: return estimate_alg1(chain, grids, paths, opt);
    case EstimatorKind::AlgII: return estimate_alg2(chain, grids, paths, opt);
    case EstimatorKind::AlgIII: return estimate_alg3(chain, grids, paths, opt);
  }
  throw std::invalid_argument("estimate: unknown estimator kind");
}

}  // namespace qtree::tree
