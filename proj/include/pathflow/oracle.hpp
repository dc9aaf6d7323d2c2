#pragma once

#include "pathflow/path.hpp"
#include "pathflow/targets.hpp"
#include "pathflow/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace pathflow {

/// Exact solution of the 1D log-weighted path with α = 0, β = 1 between
/// p₀ = N(0, σ₀²) and p₁ = N(μ₁, σ₁²).
///
/// Every intermediate law is Gaussian: precision τₜ = (1−t)/σ₀² + t/σ₁²,
/// mean mₜ = (t μ₁/σ₁²)/τₜ and standard deviation σₜ = τₜ^(−1/2). The affine field
/// φₜ(x) = (σ̇ₜ/σₜ)(x − mₜ) + ṁₜ transports pₜ along the path.
template <typename Scalar>
class GaussianPathOracle {
 public:
  GaussianPathOracle(Scalar sigma0, Scalar mu1, Scalar sigma1) : sigma0_(sigma0), mu1_(mu1), sigma1_(sigma1) {
    internal::require(sigma0 > 0 && sigma1 > 0, "GaussianPathOracle: standard deviations must be positive");
  }

  Scalar sigma0() const { return sigma0_; }
  Scalar mu1() const { return mu1_; }
  Scalar sigma1() const { return sigma1_; }

  Scalar precision(Scalar t) const { return (1 - t) / (sigma0_ * sigma0_) + t / (sigma1_ * sigma1_); }
  Scalar precision_rate() const { return 1 / (sigma1_ * sigma1_) - 1 / (sigma0_ * sigma0_); }

  Scalar mean(Scalar t) const {
    if (t == 0) return 0;
    if (t == 1) return mu1_;
    return t * mu1_ / (sigma1_ * sigma1_) / precision(t);
  }

  Scalar std(Scalar t) const {
    if (t == 0) return sigma0_;
    if (t == 1) return sigma1_;
    return 1 / std::sqrt(precision(t));
  }

  Scalar mean_rate(Scalar t) const {
    const Scalar tau = precision(t);
    const Scalar a = mu1_ / (sigma1_ * sigma1_);
    return a / tau - t * a * precision_rate() / (tau * tau);
  }

  /// σ̇ₜ/σₜ, which is also the divergence of the transport field.
  Scalar log_std_rate(Scalar t) const { return -precision_rate() / (2 * precision(t)); }

  Scalar field(Scalar x, Scalar t) const { return log_std_rate(t) * (x - mean(t)) + mean_rate(t); }
  Scalar field_divergence(Scalar t) const { return log_std_rate(t); }

  /// E_{pₜ}[∂ₜ ln p̂ₜ] in closed form, with p̂ₜ built from the normalized endpoints.
  Scalar expected_dt(Scalar t) const {
    const Scalar m = mean(t);
    const Scalar v = std(t) * std(t);
    const Scalar log_two_pi = std::log(2 * std::numbers::pi_v<Scalar>);
    const Scalar e_target = -((m - mu1_) * (m - mu1_) + v) / (2 * sigma1_ * sigma1_) -
                            Scalar(0.5) * (log_two_pi + 2 * std::log(sigma1_));
    const Scalar e_initial = -(m * m + v) / (2 * sigma0_ * sigma0_) - Scalar(0.5) * (log_two_pi + 2 * std::log(sigma0_));
    return e_target - e_initial;
  }

  /// Solution of the transport ODE started at x₀ ~ p₀.
  Scalar flow_map(Scalar x0, Scalar t) const { return std(t) / sigma0_ * x0 + mean(t); }

  std::shared_ptr<const InitialDistribution<Scalar>> initial() const {
    return std::make_shared<InitialDistribution<Scalar>>(VectorX<Scalar>::Zero(1), sigma0_);
  }

  std::shared_ptr<const GaussianMixture<Scalar>> target() const {
    VectorX<Scalar> mu(1);
    mu << mu1_;
    return std::make_shared<GaussianMixture<Scalar>>(
        GaussianMixture<Scalar>::isotropic({mu}, {sigma1_}, {Scalar(1)}));
  }

  LwsPath<Scalar> path() const { return LwsPath<Scalar>(initial(), target(), 0, 1); }

 private:
  Scalar sigma0_;
  Scalar mu1_;
  Scalar sigma1_;
};

/// max |r(x, φ) − E_{pₜ}[∂ₜ ln p̂ₜ]| over a regular (x, t) grid, with the residual taken
/// from the LwS implementation and the expectation from the oracle's closed form.
/// `field(x, t)` and `divergence(x, t)` describe the candidate 1D field.
template <typename Scalar, typename Field, typename Divergence>
Scalar residual_identity_check(const GaussianPathOracle<Scalar>& oracle, Field&& field, Divergence&& divergence,
                               Scalar x_min, Scalar x_max, Eigen::Index x_points, Eigen::Index t_points) {
  const LwsPath<Scalar> path = oracle.path();
  const VectorX<Scalar> xs = VectorX<Scalar>::LinSpaced(x_points, x_min, x_max);
  const VectorX<Scalar> ts = VectorX<Scalar>::LinSpaced(t_points, 0, 1);
  VectorX<Scalar> x(1);
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < t_points; ++i) {
    const Scalar t = std::min<Scalar>(ts(i), 1);
    const Scalar expected = oracle.expected_dt(t);
    for (Eigen::Index j = 0; j < x_points; ++j) {
      x(0) = xs(j);
      const PathTerms<Scalar> terms = path.terms(x, t);
      const Scalar r = terms.dt + terms.grad(0) * field(xs(j), t) + divergence(xs(j), t);
      worst = std::max(worst, std::abs(r - expected));
    }
  }
  return worst;
}

/// Max over coordinates of |analytic − numeric| / (1 + |analytic|), with central
/// differences of step `step · (1 + |xₖ|)`.
template <typename Scalar, typename Fn, typename GradFn>
Scalar fd_check(Fn&& fn, GradFn&& grad_fn, const VectorX<Scalar>& point, Scalar step) {
  const VectorX<Scalar> analytic = grad_fn(point);
  internal::require_dimension(analytic.size(), point.size(), "fd_check gradient");
  Scalar worst = 0;
  VectorX<Scalar> probe = point;
  for (Eigen::Index k = 0; k < point.size(); ++k) {
    const Scalar h = step * (1 + std::abs(point(k)));
    probe(k) = point(k) + h;
    const Scalar up = fn(probe);
    probe(k) = point(k) - h;
    const Scalar down = fn(probe);
    probe(k) = point(k);
    const Scalar numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(analytic(k) - numeric) / (1 + std::abs(analytic(k))));
  }
  return worst;
}

/// Derivative of a scalar function of one variable on [lo, hi]. Uses a central stencil in
/// the interior and second-order one-sided stencils within `step` of either end.
template <typename Scalar, typename Fn>
Scalar fd_derivative(Fn&& fn, Scalar at, Scalar step, Scalar lo, Scalar hi) {
  if (at - step < lo) return (-3 * fn(at) + 4 * fn(at + step) - fn(at + 2 * step)) / (2 * step);
  if (at + step > hi) return (3 * fn(at) - 4 * fn(at - step) + fn(at - 2 * step)) / (2 * step);
  return (fn(at + step) - fn(at - step)) / (2 * step);
}

}  // namespace pathflow
