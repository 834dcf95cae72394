#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qtree/pricer/bdp.hpp"

namespace qtree::pricer {

/// Swing pricing: bang-bang consumption q_k in {0,1} under the global bounds
/// Q_min <= sum q_k <= Q_max over the n decision layers 0..n-1.
struct SwingProblem {
  const tree::QuantTree* tree = nullptr;
  NodePayoff payoff;  // v_k
  int q_min = 0;
  int q_max = 0;
};

/// State is (layer k, node i, consumption-so-far m). Only reachable
/// consumption levels are stored: m in [max(0, Q_min - (n-k)), min(k, Q_max)].
struct SwingResult {
  int q_min = 0, q_max = 0;
  std::vector<int> m_lo;                          // per layer 0..n
  std::vector<int> m_count;                       // per layer 0..n
  std::vector<std::vector<double>> value;         // [k][(m - m_lo) * N_k + i]
  std::vector<std::vector<std::uint8_t>> take;    // decisions, layers 0..n-1
  double price = 0.0;

  double value_at(int k, int m, std::size_t i, std::size_t nodes) const {
    return value[static_cast<std::size_t>(k)]
                [static_cast<std::size_t>(m - m_lo[static_cast<std::size_t>(k)]) * nodes + i];
  }
  bool take_at(int k, int m, std::size_t i, std::size_t nodes) const {
    return take[static_cast<std::size_t>(k)]
               [static_cast<std::size_t>(m - m_lo[static_cast<std::size_t>(k)]) * nodes + i] != 0;
  }
};

/// Backward recursion
///   P_k(i, m) = max over admissible x in {0,1} of x v_k(i) + E(P_{k+1}(., m+x) | i),
/// where x = 1 needs m+1 <= Q_max and x = 0 needs m + (n-k-1) >= Q_min, the
/// minimal window that keeps every forward replay inside [Q_min, Q_max].
/// Ties prefer exercising. Unvisited rows absorb: their continuation is
/// dropped and only the immediate admissible payoff counts.
inline SwingResult solve_swing(const SwingProblem& problem) {
  if (!problem.tree || !problem.payoff) throw std::invalid_argument("solve_swing: incomplete problem");
  const tree::QuantTree& t = *problem.tree;
  const int n = t.layers();
  const int qmin = problem.q_min, qmax = problem.q_max;
  if (qmin < 0 || qmin > qmax) throw ConfigError("swing: need 0 <= q_min <= q_max");
  if (qmax > n) throw ConfigError("swing: q_max exceeds the number of exercise dates");
  if (qmin > n) throw ConfigError("swing: q_min infeasible at the root");

  SwingResult res;
  res.q_min = qmin;
  res.q_max = qmax;
  res.m_lo.resize(static_cast<std::size_t>(n) + 1);
  res.m_count.resize(static_cast<std::size_t>(n) + 1);
  res.value.resize(static_cast<std::size_t>(n) + 1);
  res.take.resize(static_cast<std::size_t>(n));
  for (int k = 0; k <= n; ++k) {
    const int lo = std::max(0, qmin - (n - k));
    const int hi = std::min(k, qmax);
    res.m_lo[static_cast<std::size_t>(k)] = lo;
    res.m_count[static_cast<std::size_t>(k)] = hi - lo + 1;
  }

  // Terminal layer: all stored m satisfy the constraints by construction.
  const std::size_t nodes_n = t.layer_size(n);
  res.value[static_cast<std::size_t>(n)].assign(
      static_cast<std::size_t>(res.m_count[static_cast<std::size_t>(n)]) * nodes_n, 0.0);

  std::vector<double> cont;  // continuation for one (m') slice
  for (int k = n - 1; k >= 0; --k) {
    const std::size_t nodes = t.layer_size(k);
    const int lo = res.m_lo[static_cast<std::size_t>(k)];
    const int cnt = res.m_count[static_cast<std::size_t>(k)];
    const int lo_next = res.m_lo[static_cast<std::size_t>(k) + 1];
    const int cnt_next = res.m_count[static_cast<std::size_t>(k) + 1];
    const std::size_t nodes_next = t.layer_size(k + 1);

    // E(P_{k+1}(., m') | i) for every stored m' of layer k+1.
    std::vector<std::vector<double>> cont_by_m(static_cast<std::size_t>(cnt_next));
    for (int mi = 0; mi < cnt_next; ++mi) {
      const double* slice =
          res.value[static_cast<std::size_t>(k) + 1].data() + static_cast<std::size_t>(mi) * nodes_next;
      cont_by_m[static_cast<std::size_t>(mi)] =
          cond_expectation(t, k, std::span<const double>(slice, nodes_next));
    }

    auto& val = res.value[static_cast<std::size_t>(k)];
    auto& dec = res.take[static_cast<std::size_t>(k)];
    val.assign(static_cast<std::size_t>(cnt) * nodes, 0.0);
    dec.assign(static_cast<std::size_t>(cnt) * nodes, 0);
    const quant::QuantGrid& g = t.grids[static_cast<std::size_t>(k)];

    for (int m = lo; m < lo + cnt; ++m) {
      const bool can_wait = m + (n - k - 1) >= qmin;
      const bool can_take = m + 1 <= qmax;
      for (std::size_t i = 0; i < nodes; ++i) {
        const double v = problem.payoff(k, g.point(i));
        if (!std::isfinite(v)) throw NumericError("solve_swing: non-finite payoff");
        auto continuation = [&](int m_next) {
          const double c = cont_by_m[static_cast<std::size_t>(m_next - lo_next)][i];
          return std::isnan(c) ? 0.0 : c;  // absorbing node
        };
        double best = -std::numeric_limits<double>::infinity();
        std::uint8_t best_x = 0;
        if (can_wait) {
          best = continuation(m);
          best_x = 0;
        }
        if (can_take) {
          const double cand = v + continuation(m + 1);
          if (cand >= best) {
            best = cand;
            best_x = 1;
          }
        }
        val[static_cast<std::size_t>(m - lo) * nodes + i] = best;
        dec[static_cast<std::size_t>(m - lo) * nodes + i] = best_x;
      }
    }
  }
  res.price = res.value[0][0];
  return res;
}

}  // namespace qtree::pricer
