// Independent reference computations used by the unit and acceptance suites:
// quadrature cell probabilities, a CRR binomial pricer, exhaustive swing
// enumeration and a deliberately unsynchronized counting loop. Nothing here
// reuses the code paths under test.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "qtree/rng/stream.hpp"
#include "qtree/tree/quant_tree.hpp"

namespace oracles {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// P(sign(a X + tau Z) = to_pos | sign(X) = from_pos) for X ~ N(0, v) and an
/// independent Z ~ N(0,1), by Simpson quadrature of the conditional normal
/// CDF over the half-line. This is the exact transition probability between
/// the two Voronoi cells of a symmetric two-point grid.
inline double two_cell_transition(double v, double a, double tau, bool from_pos, bool to_pos) {
  const double sd = std::sqrt(v);
  const double lim = 10.0 * sd;
  const int steps = 20000;  // Simpson needs an even count
  const double h = lim / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = i * h;                       // integrate over the positive half-line
    const double sign_x = from_pos ? x : -x;      // mirror for the negative cell
    const double pdf = std::exp(-0.5 * x * x / v) / (sd * std::sqrt(2.0 * std::numbers::pi));
    const double p_neg = normal_cdf((0.0 - a * sign_x) / tau);
    const double integrand = pdf * (to_pos ? 1.0 - p_neg : p_neg);
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * integrand;
  }
  const double joint = acc * h / 3.0;
  return joint / 0.5;  // P(sign(X) = from_pos) = 1/2
}

/// CRR binomial value of a Bermudan put: `steps` tree steps over [0, T],
/// exercise allowed only at multiples of `exercise_stride` (and maturity).
inline double bermudan_put_binomial(double s0, double strike, double r, double sigma, double horizon,
                                    int steps, int exercise_stride) {
  const double dt = horizon / steps;
  const double up = std::exp(sigma * std::sqrt(dt));
  const double down = 1.0 / up;
  const double growth = std::exp(r * dt);
  const double p_up = (growth - down) / (up - down);
  const double disc = std::exp(-r * dt);

  std::vector<double> value(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j) {
    const double s = s0 * std::pow(up, 2 * j - steps);
    value[static_cast<std::size_t>(j)] = std::max(strike - s, 0.0);
  }
  for (int k = steps - 1; k >= 0; --k) {
    const bool exercisable = k % exercise_stride == 0;
    for (int j = 0; j <= k; ++j) {
      double cont = disc * (p_up * value[static_cast<std::size_t>(j) + 1] +
                            (1.0 - p_up) * value[static_cast<std::size_t>(j)]);
      if (exercisable) {
        const double s = s0 * std::pow(up, 2 * j - k);
        cont = std::max(cont, strike - s);
      }
      value[static_cast<std::size_t>(j)] = cont;
    }
  }
  return value[0];
}

/// Forward marginals of a tree implied by its root and transition matrices.
inline std::vector<std::vector<double>> propagated_marginals(const qtree::tree::QuantTree& t) {
  std::vector<std::vector<double>> mu(static_cast<std::size_t>(t.layers()) + 1);
  mu[0].assign(t.layer_size(0), 0.0);
  mu[0][0] = 1.0;
  for (int k = 1; k <= t.layers(); ++k) {
    mu[static_cast<std::size_t>(k)].assign(t.layer_size(k), 0.0);
    for (std::size_t i = 0; i < t.layer_size(k - 1); ++i) {
      if (mu[static_cast<std::size_t>(k) - 1][i] == 0.0 || !t.row_visited(k, i)) continue;
      const auto row = t.pi_row(k, i);
      for (std::size_t j = 0; j < row.size(); ++j)
        mu[static_cast<std::size_t>(k)][j] += mu[static_cast<std::size_t>(k) - 1][i] * row[j];
    }
  }
  return mu;
}

/// Best deterministic (open-loop) schedule value: max over q in {0,1}^n with
/// Q_min <= sum q <= Q_max of sum_k q_k E v_k, expectations taken with the
/// tree's forward marginals. Equals the adapted optimum whenever v_k does not
/// depend on the node.
inline double swing_best_schedule(const qtree::tree::QuantTree& t,
                                  const std::function<double(int, std::size_t)>& payoff, int qmin,
                                  int qmax) {
  const int n = t.layers();
  const auto mu = propagated_marginals(t);
  std::vector<double> mean_v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.layer_size(k); ++i)
      acc += mu[static_cast<std::size_t>(k)][i] * payoff(k, i);
    mean_v[static_cast<std::size_t>(k)] = acc;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const int total = std::popcount(mask);
    if (total < qmin || total > qmax) continue;
    double value = 0.0;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) value += mean_v[static_cast<std::size_t>(k)];
    best = std::max(best, value);
  }
  return best;
}

/// Adapted optimum by memoization-free recursion over the full decision and
/// chance tree; exponential in n and meant for n <= 8, N <= 3 instances.
inline double swing_recursive_value(const qtree::tree::QuantTree& t,
                                    const std::function<double(int, std::size_t)>& payoff,
                                    int qmin, int qmax, int k, std::size_t node, int consumed) {
  const int n = t.layers();
  if (k == n) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int x = 0; x <= 1; ++x) {
    if (x == 1 && consumed + 1 > qmax) continue;
    if (x == 0 && consumed + (n - k - 1) < qmin) continue;
    double cont = 0.0;
    if (t.row_visited(k + 1, node)) {
      const auto row = t.pi_row(k + 1, node);
      for (std::size_t j = 0; j < row.size(); ++j)
        if (row[j] != 0.0)
          cont += row[j] * swing_recursive_value(t, payoff, qmin, qmax, k + 1, j, consumed + x);
    }
    best = std::max(best, x * payoff(k, node) + cont);
  }
  return best;
}

/// Deliberately unsynchronized shared counting: every worker read-modify-
/// writes the same counters without any barrier, so concurrent increments
/// can overwrite each other. Returns the grand total, which a correct
/// tally would pin at workers * per_worker.
inline std::uint64_t racy_shared_count(int workers, std::uint64_t per_worker, int cells,
                                       std::uint64_t seed) {
  std::vector<std::atomic<std::uint64_t>> counts(static_cast<std::size_t>(cells));
  for (auto& c : counts) c.store(0);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      auto g = qtree::rng::split_stream(
          qtree::rng::EngineKind::Mrg32k3a, seed,
          {qtree::rng::PartitionMode::Block, static_cast<std::uint64_t>(workers),
           static_cast<std::uint64_t>(w), per_worker});
      for (std::uint64_t m = 0; m < per_worker; ++m) {
        const auto cell = static_cast<std::size_t>(g.next_uniform() * cells);
        auto& c = counts[cell];
        // Split load and store: the lost-update window of a plain "c += 1".
        c.store(c.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
      }
    });
  }
  for (auto& th : pool) th.join();
  std::uint64_t total = 0;
  for (auto& c : counts) total += c.load();
  return total;
}

}  // namespace oracles
