#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qtree/pricer/bdp.hpp"
#include "qtree/pricer/swing.hpp"
#include "qtree/quant/grid.hpp"

namespace qtree::pricer {

/// Per-layer digest of a solved problem: value range and how many states
/// exercise (stopping: payoff >= continuation; swing: q = 1 chosen).
struct LayerSummary {
  int layer = 0;
  std::uint64_t nodes = 0;
  double v_min = 0.0, v_mean = 0.0, v_max = 0.0;
  std::uint64_t exercised = 0;
  std::uint64_t states = 0;

  bool operator==(const LayerSummary&) const = default;
};

struct PriceReport {
  std::string kind;  // "stopping" or "swing"
  double price = 0.0;
  double std_hint = 0.0;  // first-order root-row resampling noise, a hint only
  double wall_ms = 0.0;
  std::vector<LayerSummary> layers;

  bool operator==(const PriceReport&) const = default;
};

namespace detail {
inline void summarize(LayerSummary& s, std::span<const double> values) {
  s.states = values.size();
  if (values.empty()) return;
  double lo = values[0], hi = values[0], sum = 0.0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  s.v_min = lo;
  s.v_max = hi;
  s.v_mean = sum / static_cast<double>(values.size());
}

/// Std error of re-estimating the root row with M samples, holding the next
/// layer's values fixed: sd of V_{1}(J), J ~ pi^1_{root}, over sqrt(M).
inline double root_row_hint(const tree::QuantTree& t, std::span<const double> next_values) {
  if (t.layers() < 1 || t.samples == 0 || !t.row_visited(1, 0)) return 0.0;
  const auto row = t.pi_row(1, 0);
  double mean = 0.0, mean_sq = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    mean += row[j] * next_values[j];
    mean_sq += row[j] * next_values[j] * next_values[j];
  }
  const double var = std::max(0.0, mean_sq - mean * mean);
  return std::sqrt(var / static_cast<double>(t.samples));
}
}  // namespace detail

inline PriceReport price_report(const StoppingResult& res, const tree::QuantTree& t,
                                const StoppingProblem&, double wall_ms = 0.0) {
  PriceReport r;
  r.kind = "stopping";
  r.price = res.price;
  r.wall_ms = wall_ms;
  if (res.value.size() > 1) r.std_hint = detail::root_row_hint(t, res.value[1]);
  for (std::size_t k = 0; k < res.value.size(); ++k) {
    LayerSummary s;
    s.layer = static_cast<int>(k);
    s.nodes = t.layer_size(static_cast<int>(k));
    detail::summarize(s, res.value[k]);
    for (auto e : res.exercise[k]) s.exercised += e;
    r.layers.push_back(s);
  }
  return r;
}

inline PriceReport price_report(const SwingResult& res, const tree::QuantTree& t,
                                const SwingProblem&, double wall_ms = 0.0) {
  PriceReport r;
  r.kind = "swing";
  r.price = res.price;
  r.wall_ms = wall_ms;
  if (res.value.size() > 1) {
    // Hint uses the lowest stored consumption slice of layer 1.
    const std::size_t nodes = t.layer_size(1);
    const std::vector<double> first_slice(res.value[1].begin(),
                                          res.value[1].begin() + static_cast<std::ptrdiff_t>(nodes));
    r.std_hint = detail::root_row_hint(t, first_slice);
  }
  for (std::size_t k = 0; k < res.value.size(); ++k) {
    LayerSummary s;
    s.layer = static_cast<int>(k);
    s.nodes = t.layer_size(static_cast<int>(k));
    detail::summarize(s, res.value[k]);
    if (k < res.take.size())
      for (auto e : res.take[k]) s.exercised += e;
    r.layers.push_back(s);
  }
  return r;
}

/// CSV layout: one header/meta line pair, then one row per layer. All doubles
/// are written at 17 significant digits so a parse round-trips exactly.
inline void write_csv(const PriceReport& r, std::ostream& out) {
  using quant::detail::format_double;
  out << "kind,price,std_hint,wall_ms,layers\n";
  out << r.kind << ',' << format_double(r.price) << ',' << format_double(r.std_hint) << ','
      << format_double(r.wall_ms) << ',' << r.layers.size() << '\n';
  out << "layer,nodes,v_min,v_mean,v_max,exercised,states\n";
  for (const auto& s : r.layers)
    out << s.layer << ',' << s.nodes << ',' << format_double(s.v_min) << ','
        << format_double(s.v_mean) << ',' << format_double(s.v_max) << ',' << s.exercised << ','
        << s.states << '\n';
}

inline PriceReport read_csv(std::istream& in) {
  auto next_line = [&](const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(std::string("report: missing ") + what);
    return line;
  };
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
  };
  if (next_line("header") != "kind,price,std_hint,wall_ms,layers")
    throw IoError("report: unexpected header");
  PriceReport r;
  auto meta = split(next_line("meta row"));
  if (meta.size() != 5) throw IoError("report: malformed meta row");
  r.kind = meta[0];
  r.price = std::stod(meta[1]);
  r.std_hint = std::stod(meta[2]);
  r.wall_ms = std::stod(meta[3]);
  const std::size_t n_layers = std::stoul(meta[4]);
  if (next_line("layer header") != "layer,nodes,v_min,v_mean,v_max,exercised,states")
    throw IoError("report: unexpected layer header");
  for (std::size_t k = 0; k < n_layers; ++k) {
    auto row = split(next_line("layer row"));
    if (row.size() != 7) throw IoError("report: malformed layer row");
    LayerSummary s;
    s.layer = std::stoi(row[0]);
    s.nodes = std::stoull(row[1]);
    s.v_min = std::stod(row[2]);
    s.v_mean = std::stod(row[3]);
    s.v_max = std::stod(row[4]);
    s.exercised = std::stoull(row[5]);
    s.states = std::stoull(row[6]);
    r.layers.push_back(s);
  }
  return r;
}

}  // namespace qtree::pricer
