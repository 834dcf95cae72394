#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "qtree/errors.hpp"
#include "qtree/model/two_factor.hpp"
#include "qtree/rng/stream.hpp"

namespace qtree {

/// One full run description: model parameters, grid and sample sizes, RNG
/// engine, estimation algorithm and artifact paths. File keys and CLI flags
/// share the same names; flags win.
struct RunConfig {
  model::TwoFactorParams params;   // s0 sigma1 sigma2 alpha1 alpha2 rho r K T n
  std::size_t grid_size = 100;     // N, uniform across layers
  std::uint64_t samples = 100000;  // M
  std::uint64_t seed = 12345;
  rng::EngineKind engine = rng::EngineKind::Mrg32k3a;
  int algorithm = 1;  // 1, 2 or 3
  int workers = 1;
  std::string grids_dir;  // optional: load per-layer grids instead of building
  std::string tree_path;  // optional: where build-tree writes / pricers read
  std::string out_path;   // optional: report destination

  void validate() const {
    params.validate();
    if (grid_size < 1) throw ConfigError("parameter 'N' must be >= 1");
    if (samples < 1) throw ConfigError("parameter 'M' must be >= 1");
    if (algorithm < 1 || algorithm > 3) throw ConfigError("parameter 'algorithm' must be 1, 2 or 3");
    if (workers < 1) throw ConfigError("parameter 'workers' must be >= 1");
  }
};

namespace detail {
inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': cannot parse '" + v + "' as a number");
  }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::int64_t x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': cannot parse '" + v + "' as an integer");
  }
}
}  // namespace detail

inline rng::EngineKind parse_engine(const std::string& v) {
  if (v == "lcg48") return rng::EngineKind::Lcg48;
  if (v == "mrg32k3a") return rng::EngineKind::Mrg32k3a;
  if (v == "xorwow") return rng::EngineKind::Xorwow;
  throw ConfigError("parameter 'engine': expected lcg48|mrg32k3a|xorwow, got '" + v + "'");
}

/// Applies one key=value setting; unknown keys are rejected.
inline void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "s0") c.params.s0 = parse_double(key, value);
  else if (key == "sigma1") c.params.sigma1 = parse_double(key, value);
  else if (key == "sigma2") c.params.sigma2 = parse_double(key, value);
  else if (key == "alpha1") c.params.alpha1 = parse_double(key, value);
  else if (key == "alpha2") c.params.alpha2 = parse_double(key, value);
  else if (key == "rho") c.params.rho = parse_double(key, value);
  else if (key == "r") c.params.r = parse_double(key, value);
  else if (key == "K") c.params.strike = parse_double(key, value);
  else if (key == "T") c.params.horizon = parse_double(key, value);
  else if (key == "n") c.params.steps = static_cast<int>(parse_int(key, value));
  else if (key == "N") c.grid_size = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "M") c.samples = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "engine") c.engine = parse_engine(value);
  else if (key == "algorithm") c.algorithm = static_cast<int>(parse_int(key, value));
  else if (key == "workers") c.workers = static_cast<int>(parse_int(key, value));
  else if (key == "grids") c.grids_dir = value;
  else if (key == "tree") c.tree_path = value;
  else if (key == "out") c.out_path = value;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

/// INI-style key=value file; '#' and ';' start comments, blank lines are
/// skipped. Values are validated only when the final config is validated,
/// so flags may still override out-of-range file entries.
inline RunConfig parse_config_file(const std::filesystem::path& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
    apply_key(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

}  // namespace qtree
