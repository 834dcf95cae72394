// Command-line front end: tree building, pricing and the micro-benchmarks,
// all driven by one key=value config plus overriding flags.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtree/bench.hpp"
#include "qtree/config.hpp"
#include "qtree/pipeline.hpp"
#include "qtree/pricer/report.hpp"
#include "qtree/quant/lloyd.hpp"
#include "qtree/rng/monte_carlo.hpp"

namespace {

using namespace qtree;

struct ConfigCli {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // flag order
};

const std::vector<std::pair<std::string, std::string>> kConfigKeys = {
    {"s0", "initial spot"},
    {"sigma1", "volatility of factor 1"},
    {"sigma2", "volatility of factor 2"},
    {"alpha1", "mean reversion of factor 1"},
    {"alpha2", "mean reversion of factor 2"},
    {"rho", "factor correlation in [-1,1]"},
    {"r", "riskless rate"},
    {"K", "strike"},
    {"T", "horizon in years"},
    {"n", "number of exercise dates"},
    {"N", "grid size per layer"},
    {"M", "Monte Carlo sample count"},
    {"seed", "master RNG seed"},
    {"engine", "lcg48|mrg32k3a|xorwow"},
    {"algorithm", "transition estimator: 1, 2 or 3"},
    {"workers", "worker thread count"},
    {"grids", "directory of per-layer grid files"},
    {"tree", "tree file path"},
    {"out", "report output path"},
};

void add_config_options(CLI::App* cmd, ConfigCli& cc) {
  cmd->add_option("--config", cc.config_path, "key=value parameter file");
  for (const auto& [key, help] : kConfigKeys) {
    cmd->add_option_function<std::string>(
        "--" + key,
        [&cc, k = key](const std::string& v) { cc.overrides.emplace_back(k, v); }, help);
  }
}

RunConfig make_config(const ConfigCli& cc) {
  RunConfig cfg;
  if (const char* env = std::getenv("QTREE_WORKERS"); env && *env)
    apply_key(cfg, "workers", env);
  if (!cc.config_path.empty()) cfg = parse_config_file(cc.config_path, cfg);
  for (const auto& [k, v] : cc.overrides) apply_key(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::string describe(const RunConfig& cfg) {
  std::ostringstream os;
  os << "N=" << cfg.grid_size << " M=" << cfg.samples << " n=" << cfg.params.steps
     << " seed=" << cfg.seed << " engine=" << rng::engine_name(cfg.engine)
     << " algorithm=" << cfg.algorithm << " workers=" << cfg.workers;
  return os.str();
}

void maybe_record(const std::string& record_path, const std::string& command,
                  const std::string& parameters, const tree::BuildPhases& phases) {
  if (record_path.empty()) return;
  bench::BenchRecord rec;
  rec.command = command;
  rec.parameters = parameters;
  rec.phases = phases;
  bench::append_record(record_path, rec);
}

int cmd_build_tree(const ConfigCli& cc, const std::string& record_path) {
  RunConfig cfg = make_config(cc);
  if (cfg.tree_path.empty()) throw ConfigError("build-tree: --out (or config key 'tree') required");
  bench::StopWatch total;
  tree::BuildPhases phases;
  const auto t = build_tree(cfg, &phases);
  tree::save_tree(t, cfg.tree_path);
  std::printf("command,N,M,n,engine,algorithm,workers,simulate_ms,nn_ms,merge_ms,normalize_ms,total_ms\n");
  std::printf("build-tree,%zu,%llu,%d,%s,%d,%d,%.3f,%.3f,%.3f,%.3f,%.3f\n", cfg.grid_size,
              static_cast<unsigned long long>(cfg.samples), cfg.params.steps,
              rng::engine_name(cfg.engine), cfg.algorithm, cfg.workers, phases.simulate_ms,
              phases.nn_ms, phases.merge_ms, phases.normalize_ms, total.ms());
  maybe_record(record_path, "build-tree", describe(cfg), phases);
  return 0;
}

int cmd_price(const ConfigCli& cc, const std::string& record_path, bool swing, int qmin, int qmax,
              const std::string& payoff_kind, const std::string& report_path) {
  RunConfig cfg = make_config(cc);
  if (cfg.tree_path.empty()) throw ConfigError("price: --tree (or config key 'tree') required");
  const tree::QuantTree t = tree::load_tree(cfg.tree_path);
  if (t.layers() != cfg.params.steps)
    throw ConfigError("price: config n=" + std::to_string(cfg.params.steps) +
                      " does not match the tree's " + std::to_string(t.layers()) + " layers");
  bench::StopWatch watch;
  pricer::PriceReport report;
  if (swing) {
    const int qhi = qmax < 0 ? t.layers() : qmax;
    pricer::SwingProblem prob{&t, make_swing_payoff(cfg, t.grids[0].dim()), qmin, qhi};
    const auto res = pricer::solve_swing(prob);
    report = pricer::price_report(res, t, prob, watch.ms());
  } else {
    pricer::StoppingProblem prob{&t, payoff_kind == "call"
                                         ? make_call_payoff(cfg, t.grids[0].dim())
                                         : make_put_payoff(cfg, t.grids[0].dim())};
    const auto res = pricer::solve_stopping(prob);
    report = pricer::price_report(res, t, prob, watch.ms());
  }
  std::printf("%.10g,%.6g,%.3f\n", report.price, report.std_hint, report.wall_ms);
  if (!report_path.empty()) {
    std::ofstream f(report_path);
    if (!f) throw IoError("price: cannot open report path " + report_path);
    pricer::write_csv(report, f);
  }
  tree::BuildPhases phases;
  phases.total_ms = report.wall_ms;
  maybe_record(record_path, swing ? "price-swing" : "price-american", describe(cfg), phases);
  return 0;
}

int cmd_bench_rng(const std::string& engine, std::uint64_t samples, std::uint64_t streams,
                  const std::string& mode, std::uint64_t seed, const std::string& record_path) {
  const rng::EngineKind kind = parse_engine(engine);
  const rng::PartitionMode pm =
      mode == "skip" ? rng::PartitionMode::SkipAhead : rng::PartitionMode::Block;
  if (mode != "skip" && mode != "block")
    throw ConfigError("bench-rng: --mode must be block or skip");
  // Round up so every stream gets the same even share of draws.
  const std::uint64_t unit = 2 * streams;
  samples = (samples + unit - 1) / unit * unit;
  bench::StopWatch watch;
  const auto est = rng::estimate_pi_partitioned(kind, seed, samples, streams, pm);
  const double ms = watch.ms();
  std::printf("%s,%s,%llu,%llu,%.8f,%.6e,%.3f\n", engine.c_str(), mode.c_str(),
              static_cast<unsigned long long>(samples), static_cast<unsigned long long>(streams),
              est.estimate, est.std_error, ms);
  tree::BuildPhases phases;
  phases.simulate_ms = ms;
  phases.total_ms = ms;
  maybe_record(record_path, "bench-rng",
               "engine=" + engine + " mode=" + mode + " samples=" + std::to_string(samples) +
                   " streams=" + std::to_string(streams) + " seed=" + std::to_string(seed),
               phases);
  return 0;
}

int cmd_bench_nn(std::size_t n, std::uint64_t queries, const std::string& backend,
                 std::uint64_t seed, const std::string& record_path) {
  const quant::NnBackend be =
      backend == "kdtree" ? quant::NnBackend::KdTree : quant::NnBackend::BruteForce;
  if (backend != "kdtree" && backend != "brute")
    throw ConfigError("bench-nn: --backend must be brute or kdtree");
  rng::RngStream g = rng::split_stream(rng::EngineKind::Mrg32k3a, seed, rng::StreamPartition{});
  std::vector<double> pts(2 * n);
  for (auto& v : pts) v = g.next_gaussian();
  const quant::QuantGrid grid(2, std::move(pts));
  const quant::NnIndex index(grid, be);
  // Pre-draw the queries so only the searches are timed.
  std::vector<double> qs(2 * queries);
  for (auto& v : qs) v = g.next_gaussian();
  bench::StopWatch watch;
  std::size_t sink = 0;
  for (std::uint64_t q = 0; q < queries; ++q)
    sink += index.nearest(std::span<const double>(qs.data() + 2 * q, 2));
  const double ms = watch.ms();
  std::printf("%s,%zu,%llu,%.3f,%zu\n", backend.c_str(), n,
              static_cast<unsigned long long>(queries), ms, sink % 7);
  tree::BuildPhases phases;
  phases.nn_ms = ms;
  phases.total_ms = ms;
  maybe_record(record_path, "bench-nn",
               "backend=" + backend + " n=" + std::to_string(n) +
                   " queries=" + std::to_string(queries) + " seed=" + std::to_string(seed),
               phases);
  return 0;
}

int cmd_bench_e2e(const ConfigCli& cc, const std::string& record_path,
                  const std::string& contract, int qmin, int qmax) {
  RunConfig cfg = make_config(cc);
  PipelineOptions po;
  po.contract = contract == "american" ? Contract::American : Contract::Swing;
  po.q_min = qmin;
  po.q_max = qmax;
  bench::StopWatch total;
  const auto out = run_pipeline(cfg, po);
  std::printf(
      "command,machine,N,M,n,engine,algorithm,workers,simulate_ms,nn_ms,merge_ms,"
      "normalize_ms,build_ms,price,price_ms,total_ms\n");
  std::printf("bench-e2e,%s,%zu,%llu,%d,%s,%d,%d,%.3f,%.3f,%.3f,%.3f,%.3f,%.10g,%.3f,%.3f\n",
              bench::machine_tag().c_str(), cfg.grid_size,
              static_cast<unsigned long long>(cfg.samples), cfg.params.steps,
              rng::engine_name(cfg.engine), cfg.algorithm, cfg.workers, out.phases.simulate_ms,
              out.phases.nn_ms, out.phases.merge_ms, out.phases.normalize_ms, out.phases.total_ms,
              out.price, out.report.wall_ms, total.ms());
  maybe_record(record_path, "bench-e2e", describe(cfg) + " contract=" + contract, out.phases);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantization-tree Monte Carlo engine"};
  app.require_subcommand(1);

  std::string record_path;
  app.add_option("--record", record_path, "append a benchmark record line to this CSV")
      ->configurable(false);

  ConfigCli cc_build, cc_amer, cc_swing, cc_e2e;

  auto* build = app.add_subcommand("build-tree", "estimate transition probabilities");
  add_config_options(build, cc_build);
  std::string build_out;
  build->add_option("--out", build_out, "tree output file");

  auto* amer = app.add_subcommand("price-american", "optimal stopping on a tree file");
  add_config_options(amer, cc_amer);
  std::string amer_payoff = "put";
  std::string amer_report;
  amer->add_option("--payoff", amer_payoff, "put|call (default put)");
  amer->add_option("--report", amer_report, "write the full layer report CSV here");

  auto* swing = app.add_subcommand("price-swing", "swing rights on a tree file");
  add_config_options(swing, cc_swing);
  int qmin = 0, qmax = -1;
  std::string swing_report;
  swing->add_option("--qmin", qmin, "global minimum consumption");
  swing->add_option("--qmax", qmax, "global maximum consumption (default: all dates)");
  swing->add_option("--report", swing_report, "write the full layer report CSV here");

  auto* brng = app.add_subcommand("bench-rng", "Monte Carlo pi with partitioned streams");
  std::string rng_engine = "mrg32k3a", rng_mode = "block";
  std::uint64_t rng_samples = 10000000, rng_streams = 1, rng_seed = 12345;
  brng->add_option("--engine", rng_engine, "lcg48|mrg32k3a|xorwow");
  brng->add_option("--samples", rng_samples, "uniform draws (rounded up to 2*streams)");
  brng->add_option("--streams", rng_streams, "parallel stream count");
  brng->add_option("--mode", rng_mode, "block|skip");
  brng->add_option("--seed", rng_seed, "master seed");

  auto* bnn = app.add_subcommand("bench-nn", "nearest-neighbor search timing");
  std::size_t nn_n = 100;
  std::uint64_t nn_queries = 36500000, nn_seed = 12345;
  std::string nn_backend = "brute";
  bnn->add_option("--n", nn_n, "grid size (e.g. 100, 250, 500)");
  bnn->add_option("--queries", nn_queries, "number of 2-d queries");
  bnn->add_option("--backend", nn_backend, "brute|kdtree");
  bnn->add_option("--seed", nn_seed, "RNG seed");

  auto* e2e = app.add_subcommand("bench-e2e", "grids + tree + pricing in one run");
  add_config_options(e2e, cc_e2e);
  std::string e2e_contract = "swing";
  int e2e_qmin = 0, e2e_qmax = -1;
  e2e->add_option("--contract", e2e_contract, "american|swing");
  e2e->add_option("--qmin", e2e_qmin, "swing: global minimum consumption");
  e2e->add_option("--qmax", e2e_qmax, "swing: global maximum consumption");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      if (!build_out.empty()) cc_build.overrides.emplace_back("tree", build_out);
      return cmd_build_tree(cc_build, record_path);
    }
    if (amer->parsed()) return cmd_price(cc_amer, record_path, false, 0, 0, amer_payoff, amer_report);
    if (swing->parsed()) return cmd_price(cc_swing, record_path, true, qmin, qmax, "", swing_report);
    if (brng->parsed())
      return cmd_bench_rng(rng_engine, rng_samples, rng_streams, rng_mode, rng_seed, record_path);
    if (bnn->parsed()) return cmd_bench_nn(nn_n, nn_queries, nn_backend, nn_seed, record_path);
    if (e2e->parsed()) return cmd_bench_e2e(cc_e2e, record_path, e2e_contract, e2e_qmin, e2e_qmax);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
