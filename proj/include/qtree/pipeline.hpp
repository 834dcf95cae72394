#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qtree/bench.hpp"
#include "qtree/config.hpp"
#include "qtree/model/chains.hpp"
#include "qtree/pricer/report.hpp"
#include "qtree/quant/lloyd.hpp"
#include "qtree/tree/estimate.hpp"

namespace qtree {

/// Grid-building knobs for the randomized Lloyd fixed point.
struct LloydOptions {
  int iterations = 40;
  std::uint64_t samples_per_iter = 0;  // 0: max(20000, 200 N)
};

/// Builds one standard-normal base grid and maps it through the Cholesky
/// factor of each layer's marginal covariance. The images match the first
/// two moments of every layer law, which is the cheap route to usable grids
/// when optimal ones are not available.
inline std::vector<quant::QuantGrid> build_two_factor_grids(const model::Ar1Spec& spec,
                                                            std::size_t grid_size,
                                                            std::uint64_t seed,
                                                            const LloydOptions& lo = {}) {
  if (std::abs(spec.params().rho) >= 1.0)
    throw NumericError("grid build: |rho| = 1 degenerates the factor law; supply grids instead");
  const std::uint64_t per_iter =
      lo.samples_per_iter ? lo.samples_per_iter : std::max<std::uint64_t>(20000, 200 * grid_size);
  rng::RngStream g = rng::split_stream(rng::EngineKind::Mrg32k3a, seed ^ 0x9E3779B9ull,
                                       rng::StreamPartition{});
  quant::GaussianSampler sampler{2};
  auto base = quant::lloyd_build(sampler, grid_size, 2, lo.iterations, per_iter, g);

  std::vector<quant::QuantGrid> grids;
  grids.reserve(static_cast<std::size_t>(spec.steps()));
  for (int k = 1; k <= spec.steps(); ++k) {
    const model::LowerTri2 l = model::cholesky2(spec.marginal_cov(k));
    std::vector<double> pts(base.grid.data().begin(), base.grid.data().end());
    for (std::size_t i = 0; i < base.grid.size(); ++i) {
      const double z1 = pts[2 * i], z2 = pts[2 * i + 1];
      pts[2 * i] = l.l11 * z1;
      pts[2 * i + 1] = l.l21 * z1 + l.l22 * z2;
    }
    grids.emplace_back(2, std::move(pts));
  }
  return grids;
}

/// Scaled copies of one standard-normal grid: in one dimension the optimal
/// quantizer of N(0, t) is exactly sqrt(t) times the optimal grid of N(0,1).
inline std::vector<quant::QuantGrid> build_brownian_grids(const model::BrownianChain1d& chain,
                                                          std::size_t grid_size,
                                                          std::uint64_t seed,
                                                          const LloydOptions& lo = {}) {
  const std::uint64_t per_iter =
      lo.samples_per_iter ? lo.samples_per_iter : std::max<std::uint64_t>(20000, 200 * grid_size);
  rng::RngStream g = rng::split_stream(rng::EngineKind::Mrg32k3a, seed ^ 0x9E3779B9ull,
                                       rng::StreamPartition{});
  quant::GaussianSampler sampler{1};
  auto base = quant::lloyd_build(sampler, grid_size, 1, lo.iterations, per_iter, g);

  std::vector<quant::QuantGrid> grids;
  grids.reserve(static_cast<std::size_t>(chain.layers()));
  for (int k = 1; k <= chain.layers(); ++k) {
    const double scale = std::sqrt(chain.time(k));
    std::vector<double> pts(base.grid.data().begin(), base.grid.data().end());
    for (auto& v : pts) v *= scale;
    grids.emplace_back(1, std::move(pts));
  }
  return grids;
}

inline std::vector<quant::QuantGrid> load_grids_dir(const std::filesystem::path& dir, int layers) {
  std::vector<quant::QuantGrid> grids;
  grids.reserve(static_cast<std::size_t>(layers));
  for (int k = 1; k <= layers; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "layer_%03d.grid", k);
    grids.push_back(quant::load_grid(dir / name));
  }
  return grids;
}

inline void save_grids_dir(const std::filesystem::path& dir,
                           std::span<const quant::QuantGrid> grids) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < grids.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "layer_%03zu.grid", k + 1);
    quant::save_grid(grids[k], dir / name);
  }
}

/// Builds the full 2-factor quantization tree described by the config:
/// grids from the Lloyd base (or from config.grids_dir) and transitions via
/// the configured algorithm.
inline tree::QuantTree build_tree(const RunConfig& cfg, tree::BuildPhases* phases = nullptr) {
  cfg.validate();
  const model::Ar1Spec spec = model::ar1_coefficients(cfg.params);
  const model::TwoFactorChain chain(spec);
  const auto grids = cfg.grids_dir.empty()
                         ? build_two_factor_grids(spec, cfg.grid_size, cfg.seed)
                         : load_grids_dir(cfg.grids_dir, chain.layers());
  tree::EstimateOptions opt;
  opt.engine = cfg.engine;
  opt.seed = cfg.seed;
  opt.workers = cfg.workers;
  opt.phases = phases;
  const auto kind = cfg.algorithm == 1   ? tree::EstimatorKind::AlgI
                    : cfg.algorithm == 2 ? tree::EstimatorKind::AlgII
                                         : tree::EstimatorKind::AlgIII;
  return tree::estimate(kind, chain, grids, cfg.samples, opt);
}

/// Discounted put obstacle for any tree dimension: 1-d nodes are Brownian
/// states under the lognormal benchmark dynamics, 2-d nodes are factor
/// states under the 2-factor spot.
inline pricer::NodePayoff make_put_payoff(const RunConfig& cfg, int dim) {
  const model::TwoFactorParams p = cfg.params;
  const double dt = p.horizon / p.steps;
  if (dim == 1) {
    return [p, dt](int k, std::span<const double> x) {
      const double t = k * dt;
      return std::exp(-p.r * t) * model::amer_put_payoff(t, x[0], p);
    };
  }
  return [p, dt](int k, std::span<const double> x) {
    const double t = k * dt;
    return std::exp(-p.r * t) * std::max(p.strike - model::spot(p, t, x[0], x[1]), 0.0);
  };
}

/// Discounted call obstacle, same node conventions as make_put_payoff.
inline pricer::NodePayoff make_call_payoff(const RunConfig& cfg, int dim) {
  const model::TwoFactorParams p = cfg.params;
  const double dt = p.horizon / p.steps;
  if (dim == 1) {
    return [p, dt](int k, std::span<const double> x) {
      const double t = k * dt;
      return std::exp(-p.r * t) * model::amer_payoff(t, x[0], p);
    };
  }
  return [p, dt](int k, std::span<const double> x) {
    const double t = k * dt;
    return std::exp(-p.r * t) * std::max(model::spot(p, t, x[0], x[1]) - p.strike, 0.0);
  };
}

/// Discounted signed spread v_k for swing rights.
inline pricer::NodePayoff make_swing_payoff(const RunConfig& cfg, int dim) {
  const model::TwoFactorParams p = cfg.params;
  const double dt = p.horizon / p.steps;
  if (dim == 1) {
    return [p, dt](int k, std::span<const double> x) {
      const double t = k * dt;
      const double s = p.s0 * std::exp((p.r - 0.5 * p.sigma1 * p.sigma1) * t + p.sigma1 * x[0]);
      return std::exp(-p.r * t) * (s - p.strike);
    };
  }
  return [p, dt](int k, std::span<const double> x) {
    const double t = k * dt;
    return std::exp(-p.r * t) * (model::spot(p, t, x[0], x[1]) - p.strike);
  };
}

enum class Contract { American, Swing };

struct PipelineOptions {
  Contract contract = Contract::Swing;
  int q_min = 0;
  int q_max = -1;  // -1: all dates
};

struct PipelineResult {
  tree::QuantTree tree;
  tree::BuildPhases phases;
  pricer::PriceReport report;
  double price = 0.0;
};

/// Grid build + tree estimation + one pricing pass; writes the tree and the
/// report when the config names paths. Deterministic given seed and config
/// (worker count never changes the numbers).
inline PipelineResult run_pipeline(const RunConfig& cfg, const PipelineOptions& po = {}) {
  PipelineResult out;
  out.tree = build_tree(cfg, &out.phases);
  if (!cfg.tree_path.empty()) tree::save_tree(out.tree, cfg.tree_path);

  bench::StopWatch price_watch;
  if (po.contract == Contract::American) {
    pricer::StoppingProblem prob{&out.tree, make_put_payoff(cfg, out.tree.grids[0].dim())};
    const auto res = pricer::solve_stopping(prob);
    out.price = res.price;
    out.report = pricer::price_report(res, out.tree, prob, price_watch.ms());
  } else {
    const int qmax = po.q_max < 0 ? out.tree.layers() : po.q_max;
    pricer::SwingProblem prob{&out.tree, make_swing_payoff(cfg, out.tree.grids[0].dim()),
                              po.q_min, qmax};
    const auto res = pricer::solve_swing(prob);
    out.price = res.price;
    out.report = pricer::price_report(res, out.tree, prob, price_watch.ms());
  }
  if (!cfg.out_path.empty()) {
    std::ofstream f(cfg.out_path);
    if (!f) throw IoError("pipeline: cannot open report path " + cfg.out_path);
    pricer::write_csv(out.report, f);
  }
  return out;
}

}  // namespace qtree
