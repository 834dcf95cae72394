#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qtree/tree/quant_tree.hpp"

namespace qtree::pricer {

/// Node payoff: layer index and the node's coordinates. Discounting is the
/// payoff's business; the recursions never touch it.
using NodePayoff = std::function<double(int layer, std::span<const double> node)>;

/// Optimal stopping on a quantization tree.
struct StoppingProblem {
  const tree::QuantTree* tree = nullptr;
  NodePayoff payoff;
};

/// Value tables per layer plus the exercise decisions (payoff >= continuation)
/// and the layer-0 price at the root node.
struct StoppingResult {
  std::vector<std::vector<double>> value;
  std::vector<std::vector<std::uint8_t>> exercise;
  double price = 0.0;
};

/// E(f(X_{k+1}) | X_k = x_i): the row-stochastic product pi^{k+1} f. Rows of
/// unvisited source cells have no estimate and come back as quiet NaN; the
/// solvers treat those nodes as absorbing.
inline std::vector<double> cond_expectation(const tree::QuantTree& t, int k,
                                            std::span<const double> f) {
  if (k < 0 || k >= t.layers()) throw std::invalid_argument("cond_expectation: layer out of range");
  const std::size_t rows = t.layer_size(k);
  const std::size_t cols = t.layer_size(k + 1);
  if (f.size() != cols) throw std::invalid_argument("cond_expectation: value vector length mismatch");
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!t.row_visited(k + 1, i)) {
      out[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const auto row = t.pi_row(k + 1, i);
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * f[j];
    out[i] = acc;
  }
  return out;
}

/// Backward recursion V_k = max(payoff, E(V_{k+1} | node)); nodes with no
/// outgoing estimate absorb at their immediate payoff.
inline StoppingResult solve_stopping(const StoppingProblem& problem) {
  if (!problem.tree || !problem.payoff) throw std::invalid_argument("solve_stopping: incomplete problem");
  const tree::QuantTree& t = *problem.tree;
  const int n = t.layers();

  StoppingResult res;
  res.value.resize(static_cast<std::size_t>(n) + 1);
  res.exercise.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    res.value[static_cast<std::size_t>(k)].resize(t.layer_size(k));
    res.exercise[static_cast<std::size_t>(k)].resize(t.layer_size(k));
  }

  const quant::QuantGrid& gn = t.grids[static_cast<std::size_t>(n)];
  for (std::size_t i = 0; i < gn.size(); ++i) {
    const double phi = problem.payoff(n, gn.point(i));
    if (!std::isfinite(phi)) throw NumericError("solve_stopping: non-finite payoff");
    res.value[static_cast<std::size_t>(n)][i] = phi;
    res.exercise[static_cast<std::size_t>(n)][i] = phi > 0.0 ? 1 : 0;
  }

  for (int k = n - 1; k >= 0; --k) {
    const auto cont = cond_expectation(t, k, res.value[static_cast<std::size_t>(k) + 1]);
    const quant::QuantGrid& g = t.grids[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double phi = problem.payoff(k, g.point(i));
      if (!std::isfinite(phi)) throw NumericError("solve_stopping: non-finite payoff");
      if (std::isnan(cont[i])) {
        res.value[static_cast<std::size_t>(k)][i] = phi;
        res.exercise[static_cast<std::size_t>(k)][i] = 1;
      } else {
        res.value[static_cast<std::size_t>(k)][i] = std::max(phi, cont[i]);
        res.exercise[static_cast<std::size_t>(k)][i] = phi >= cont[i] ? 1 : 0;
      }
    }
  }
  res.price = res.value[0][0];
  return res;
}

}  // namespace qtree::pricer
