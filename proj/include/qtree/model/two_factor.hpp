#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qtree/errors.hpp"

namespace qtree::model {

/// Gaussian 2-factor spot model
///   S_t = s0 exp(sigma1 X^1_t + sigma2 X^2_t - mu_t / 2)
/// driven by two correlated exponentially-weighted Brownian integrals.
/// mu_t = Var(sigma1 X^1_t + sigma2 X^2_t), so the exponential factor has
/// unit mean and E S_t = s0 at every t.
struct TwoFactorParams {
  double s0 = 100.0;
  double sigma1 = 0.5;
  double sigma2 = 0.3;
  double alpha1 = 1.0;
  double alpha2 = 4.0;
  double rho = 0.0;
  double r = 0.0;
  double strike = 100.0;
  double horizon = 1.0;  // T
  int steps = 365;       // n exercise dates, uniform grid t_k = k T / n

  void validate() const {
    auto fail = [](const std::string& key, const std::string& what) {
      throw ConfigError("parameter '" + key + "' " + what);
    };
    if (!(s0 > 0.0)) fail("s0", "must be > 0");
    if (!(sigma1 >= 0.0)) fail("sigma1", "must be >= 0");
    if (!(sigma2 >= 0.0)) fail("sigma2", "must be >= 0");
    if (!(alpha1 > 0.0)) fail("alpha1", "must be > 0");
    if (!(alpha2 > 0.0)) fail("alpha2", "must be > 0");
    if (!(rho >= -1.0 && rho <= 1.0)) fail("rho", "must lie in [-1, 1]");
    if (!std::isfinite(r)) fail("r", "must be finite");
    if (!(strike > 0.0)) fail("K", "must be > 0");
    if (!(horizon > 0.0)) fail("T", "must be > 0");
    if (steps < 1) fail("n", "must be >= 1");
  }
};

struct Cov2 {
  double c11 = 0.0, c12 = 0.0, c22 = 0.0;
};

/// Lower-triangular factor L with L L^T equal to a 2x2 covariance.
struct LowerTri2 {
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
};

/// Covariance of (X^1_t, X^2_t), the OU integrals, accumulated from 0 to t:
///   Var X^i_t = (1 - e^{-2 a_i t}) / (2 a_i),
///   Cov       = rho (1 - e^{-(a1+a2) t}) / (a1 + a2).
inline Cov2 ou_covariance(double t, double alpha1, double alpha2, double rho) {
  Cov2 c;
  c.c11 = -std::expm1(-2.0 * alpha1 * t) / (2.0 * alpha1);
  c.c22 = -std::expm1(-2.0 * alpha2 * t) / (2.0 * alpha2);
  c.c12 = -rho * std::expm1(-(alpha1 + alpha2) * t) / (alpha1 + alpha2);
  return c;
}

/// Cholesky factor; a rank-1 covariance (|rho| = 1 with equal reversion
/// speeds) clamps the trailing pivot at zero instead of failing.
inline LowerTri2 cholesky2(const Cov2& c) {
  LowerTri2 t;
  if (c.c11 < 0.0 || c.c22 < 0.0) throw NumericError("cholesky2: negative variance");
  t.l11 = std::sqrt(c.c11);
  t.l21 = t.l11 > 0.0 ? c.c12 / t.l11 : 0.0;
  const double rem = c.c22 - t.l21 * t.l21;
  if (rem < -1e-12 * std::max(1.0, c.c22))
    throw NumericError("cholesky2: covariance not positive semi-definite");
  t.l22 = std::sqrt(std::max(0.0, rem));
  return t;
}

/// One-step operators of the exact AR(1) form X_{k+1} = A_k X_k + T_k eps_k.
struct Ar1Step {
  double a1 = 0.0, a2 = 0.0;  // diagonal of A_k
  LowerTri2 chol;             // T_k
};

/// Deterministic per-step data realizing the exact transition law of the OU
/// pair on the uniform grid t_k = k T / n. A_k contracts by e^{-alpha dt};
/// T_k T_k^T reproduces the one-step conditional covariance exactly.
class Ar1Spec {
 public:
  static Ar1Spec from_params(const TwoFactorParams& p) {
    p.validate();
    Ar1Spec spec;
    spec.params_ = p;
    const double dt = p.horizon / p.steps;
    Ar1Step s;
    s.a1 = std::exp(-p.alpha1 * dt);
    s.a2 = std::exp(-p.alpha2 * dt);
    s.chol = cholesky2(ou_covariance(dt, p.alpha1, p.alpha2, p.rho));
    spec.steps_.assign(static_cast<std::size_t>(p.steps), s);
    return spec;
  }

  const TwoFactorParams& params() const { return params_; }
  int steps() const { return static_cast<int>(steps_.size()); }
  double dt() const { return params_.horizon / params_.steps; }
  double time(int k) const { return k * dt(); }
  const Ar1Step& step_op(int k) const { return steps_[static_cast<std::size_t>(k)]; }

  /// Conditional covariance of X_{k+1} given X_k (identical across k on the
  /// uniform grid).
  Cov2 step_cov(int k) const {
    const auto& t = steps_[static_cast<std::size_t>(k)].chol;
    return {t.l11 * t.l11, t.l11 * t.l21, t.l21 * t.l21 + t.l22 * t.l22};
  }

  /// Marginal covariance of X_k.
  Cov2 marginal_cov(int k) const {
    return ou_covariance(time(k), params_.alpha1, params_.alpha2, params_.rho);
  }

 private:
  TwoFactorParams params_;
  std::vector<Ar1Step> steps_;
};

inline Ar1Spec ar1_coefficients(const TwoFactorParams& p) { return Ar1Spec::from_params(p); }

struct PathState {
  int layer = 0;
  double x1 = 0.0, x2 = 0.0;
};

inline PathState step(const PathState& s, const Ar1Spec& spec, double eps1, double eps2) {
  if (s.layer >= spec.steps()) throw NumericError("step: path already at the final layer");
  const Ar1Step& op = spec.step_op(s.layer);
  PathState out;
  out.layer = s.layer + 1;
  out.x1 = op.a1 * s.x1 + op.chol.l11 * eps1;
  out.x2 = op.a2 * s.x2 + op.chol.l21 * eps1 + op.chol.l22 * eps2;
  return out;
}

/// Variance of sigma1 X^1_t + sigma2 X^2_t; the -mu/2 compensator in the spot.
inline double spot_compensator(const TwoFactorParams& p, double t) {
  const Cov2 c = ou_covariance(t, p.alpha1, p.alpha2, p.rho);
  return p.sigma1 * p.sigma1 * c.c11 + 2.0 * p.sigma1 * p.sigma2 * c.c12 +
         p.sigma2 * p.sigma2 * c.c22;
}

inline double spot(const TwoFactorParams& p, double t, double x1, double x2) {
  return p.s0 * std::exp(p.sigma1 * x1 + p.sigma2 * x2 - 0.5 * spot_compensator(p, t));
}

inline double spot(const PathState& s, const Ar1Spec& spec) {
  return spot(spec.params(), spec.time(s.layer), s.x1, s.x2);
}

/// Call obstacle of the one-factor Black-Scholes benchmark chain, evaluated
/// on the Brownian state x (sigma1 plays the lognormal volatility).
inline double amer_payoff(double t, double x, const TwoFactorParams& p) {
  const double s = p.s0 * std::exp((p.r - 0.5 * p.sigma1 * p.sigma1) * t + p.sigma1 * x);
  return std::max(s - p.strike, 0.0);
}

/// Put counterpart on the same one-factor chain.
inline double amer_put_payoff(double t, double x, const TwoFactorParams& p) {
  const double s = p.s0 * std::exp((p.r - 0.5 * p.sigma1 * p.sigma1) * t + p.sigma1 * x);
  return std::max(p.strike - s, 0.0);
}

/// Per-exercise swing value: discounted spread, deliberately signed.
inline double swing_payoff(int k, const PathState& s, const Ar1Spec& spec) {
  const TwoFactorParams& p = spec.params();
  const double t = spec.time(k);
  return std::exp(-p.r * t) * (spot(p, t, s.x1, s.x2) - p.strike);
}

}  // namespace qtree::model
