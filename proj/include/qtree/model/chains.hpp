#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "qtree/model/two_factor.hpp"

namespace qtree::model {

/// A simulatable Markov chain on R^d over layers 0..layers(). All randomness
/// enters through explicit standard-normal slots so that callers control the
/// stream layout exactly:
///  - step consumes normals_per_step() normals,
///  - sample_marginal consumes dim() normals (possibly ignoring some).
template <class C>
concept MarkovChain = requires(const C c, int k, std::span<const double> x,
                               std::span<double> out, std::span<const double> eps) {
  { c.dim() } -> std::convertible_to<int>;
  { c.layers() } -> std::convertible_to<int>;
  { c.normals_per_step() } -> std::convertible_to<int>;
  c.initial(out);
  c.step(k, x, out, eps);
  c.sample_marginal(k, out, eps);
};

/// The 2-factor OU pair as a chain; marginals are exact Gaussians obtained
/// from the cumulative covariance, so any layer can be sampled directly.
class TwoFactorChain {
 public:
  explicit TwoFactorChain(Ar1Spec spec) : spec_(std::move(spec)) {
    marginal_chol_.reserve(static_cast<std::size_t>(spec_.steps()) + 1);
    for (int k = 0; k <= spec_.steps(); ++k)
      marginal_chol_.push_back(cholesky2(spec_.marginal_cov(k)));
  }

  const Ar1Spec& spec() const { return spec_; }
  int dim() const { return 2; }
  int layers() const { return spec_.steps(); }
  int normals_per_step() const { return 2; }

  void initial(std::span<double> out) const {
    out[0] = 0.0;
    out[1] = 0.0;
  }

  void step(int k, std::span<const double> x, std::span<double> out,
            std::span<const double> eps) const {
    const Ar1Step& op = spec_.step_op(k);
    out[0] = op.a1 * x[0] + op.chol.l11 * eps[0];
    out[1] = op.a2 * x[1] + op.chol.l21 * eps[0] + op.chol.l22 * eps[1];
  }

  void sample_marginal(int k, std::span<double> out, std::span<const double> eps) const {
    const LowerTri2& l = marginal_chol_[static_cast<std::size_t>(k)];
    out[0] = l.l11 * eps[0];
    out[1] = l.l21 * eps[0] + l.l22 * eps[1];
  }

 private:
  Ar1Spec spec_;
  std::vector<LowerTri2> marginal_chol_;
};

/// Standard Brownian motion on a uniform grid, the one-dimensional
/// benchmark chain: X_{k+1} = X_k + sqrt(dt) eps.
class BrownianChain1d {
 public:
  BrownianChain1d(int steps, double horizon = 1.0) : steps_(steps), horizon_(horizon) {
    if (steps < 1) throw NumericError("BrownianChain1d: need at least one step");
    if (!(horizon > 0.0)) throw NumericError("BrownianChain1d: horizon must be > 0");
  }

  int dim() const { return 1; }
  int layers() const { return steps_; }
  int normals_per_step() const { return 1; }
  double dt() const { return horizon_ / steps_; }
  double time(int k) const { return k * dt(); }

  void initial(std::span<double> out) const { out[0] = 0.0; }

  void step(int, std::span<const double> x, std::span<double> out,
            std::span<const double> eps) const {
    out[0] = x[0] + std::sqrt(dt()) * eps[0];
  }

  void sample_marginal(int k, std::span<double> out, std::span<const double> eps) const {
    out[0] = k == 0 ? 0.0 : std::sqrt(time(k)) * eps[0];
  }

 private:
  int steps_;
  double horizon_;
};

static_assert(MarkovChain<TwoFactorChain>);
static_assert(MarkovChain<BrownianChain1d>);

}  // namespace qtree::model
