#pragma once

#include "pathflow/targets.hpp"
#include "pathflow/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <string>
#include <utility>

namespace pathflow {

/// ln p̂ₜ(x), ∇ln p̂ₜ(x) and ∂ₜ ln p̂ₜ(x) evaluated at one point.
template <typename Scalar>
struct PathTerms {
  Scalar log;
  VectorX<Scalar> grad;
  Scalar dt;
};

/// A partition-free density path {p̂ₜ}, t ∈ [0, 1].
template <typename Scalar>
class GuidePath {
 public:
  using Vector = VectorX<Scalar>;
  using VectorRef = Eigen::Ref<const Vector>;

  virtual ~GuidePath() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Scalar log_t(const VectorRef& x, Scalar t) const = 0;
  virtual Vector grad_log_t(const VectorRef& x, Scalar t) const = 0;
  virtual Scalar dt_log_t(const VectorRef& x, Scalar t) const = 0;

  virtual PathTerms<Scalar> terms(const VectorRef& x, Scalar t) const {
    return {log_t(x, t), grad_log_t(x, t), dt_log_t(x, t)};
  }
};

namespace internal {

template <typename Scalar>
void require_unit_time(Scalar t) {
  if (!(t >= 0 && t <= 1)) throw ContractViolation("path time must lie in [0, 1], got " + std::to_string(t));
}

}  // namespace internal

/// Log-weighted shrinkage path
///
///   ln p̂ₜ(x) = (1 − t) ln p₀((1 − αt) x) + t ln p̂₁(x / (β + (1 − β) t)),
///
/// with α ∈ [0, 1] spreading the initial term and β ∈ (0, 1] shrinking the target term
/// toward the origin. The boundary identities p̂₀ = p₀ and p̂₁ = p̂₁ hold exactly.
template <typename Scalar>
class LwsPath final : public GuidePath<Scalar> {
 public:
  using typename GuidePath<Scalar>::Vector;
  using typename GuidePath<Scalar>::VectorRef;

  LwsPath(TargetPtr<Scalar> initial, TargetPtr<Scalar> target, Scalar alpha, Scalar beta)
      : initial_(std::move(initial)), target_(std::move(target)), alpha_(alpha), beta_(beta) {
    internal::require(initial_ != nullptr && target_ != nullptr, "LwsPath: null density");
    internal::require_dimension(target_->dimension(), initial_->dimension(), "LwsPath target");
    if (!(alpha_ >= 0 && alpha_ <= 1)) throw ContractViolation("LwsPath: alpha must lie in [0, 1]");
    if (!(beta_ > 0 && beta_ <= 1)) throw ContractViolation("LwsPath: beta must lie in (0, 1]");
  }

  Eigen::Index dimension() const override { return initial_->dimension(); }
  Scalar alpha() const { return alpha_; }
  Scalar beta() const { return beta_; }
  const TargetDensity<Scalar>& initial() const { return *initial_; }
  const TargetDensity<Scalar>& target() const { return *target_; }

  /// Argument scale of the initial term, 1 − αt.
  Scalar spread(Scalar t) const { return 1 - alpha_ * t; }

  /// Argument divisor of the target term, β + (1 − β)t; exactly 1 at t = 1.
  Scalar shrink(Scalar t) const { return t == 1 ? Scalar(1) : beta_ + (1 - beta_) * t; }

  Scalar log_t(const VectorRef& x, Scalar t) const override {
    check(x, t);
    const Vector xa = spread(t) * x;
    const Vector xb = x / shrink(t);
    return (1 - t) * initial_->log_unnorm(xa) + t * target_->log_unnorm(xb);
  }

  Vector grad_log_t(const VectorRef& x, Scalar t) const override {
    check(x, t);
    const Scalar a = spread(t);
    const Scalar b = shrink(t);
    const Vector xa = a * x;
    const Vector xb = x / b;
    return (1 - t) * a * initial_->grad_log_unnorm(xa) + (t / b) * target_->grad_log_unnorm(xb);
  }

  Scalar dt_log_t(const VectorRef& x, Scalar t) const override { return terms(x, t).dt; }

  PathTerms<Scalar> terms(const VectorRef& x, Scalar t) const override {
    check(x, t);
    const Scalar a = spread(t);
    const Scalar b = shrink(t);
    const Vector xa = a * x;
    const Vector xb = x / b;
    const Scalar log0 = initial_->log_unnorm(xa);
    const Scalar log1 = target_->log_unnorm(xb);
    const Vector grad0 = initial_->grad_log_unnorm(xa);
    const Vector grad1 = target_->grad_log_unnorm(xb);

    PathTerms<Scalar> out;
    out.log = (1 - t) * log0 + t * log1;
    out.grad = (1 - t) * a * grad0 + (t / b) * grad1;
    out.dt = -log0 + log1 - alpha_ * (1 - t) * x.dot(grad0) - (1 - beta_) * t * x.dot(grad1) / (b * b);
    return out;
  }

 private:
  void check(const VectorRef& x, Scalar t) const {
    internal::require_dimension(x.size(), dimension(), "LwsPath");
    internal::require_unit_time(t);
  }

  TargetPtr<Scalar> initial_;
  TargetPtr<Scalar> target_;
  Scalar alpha_;
  Scalar beta_;
};

/// The intermediate density p̂ₜ at a frozen time, viewed as a target.
/// Holds a reference; the path must outlive the slice.
template <typename Scalar>
class PathSlice final : public TargetDensity<Scalar> {
 public:
  using typename TargetDensity<Scalar>::Vector;
  using typename TargetDensity<Scalar>::VectorRef;

  PathSlice(const GuidePath<Scalar>& path, Scalar t) : path_(&path), t_(t) { internal::require_unit_time(t); }

  Eigen::Index dimension() const override { return path_->dimension(); }
  Scalar log_unnorm(const VectorRef& x) const override { return path_->log_t(x, t_); }
  Vector grad_log_unnorm(const VectorRef& x) const override { return path_->grad_log_t(x, t_); }

 private:
  const GuidePath<Scalar>* path_;
  Scalar t_;
};

/// Densities of a 1D path on a regular (t, x) grid; every time slice sums to one.
template <typename Scalar>
struct PathGrid {
  VectorX<Scalar> t;
  VectorX<Scalar> x;
  MatrixX<Scalar> density;  // rows: t, columns: x
};

template <typename Scalar>
PathGrid<Scalar> path_grid(const GuidePath<Scalar>& path, Scalar x_min, Scalar x_max, Eigen::Index x_points,
                           Eigen::Index t_points) {
  if (path.dimension() != 1) throw Unsupported("path_grid: only 1D paths can be gridded");
  internal::require(x_points >= 2 && t_points >= 2, "path_grid: need at least two points per axis");
  internal::require(x_max > x_min, "path_grid: empty x range");

  PathGrid<Scalar> grid;
  grid.x = VectorX<Scalar>::LinSpaced(x_points, x_min, x_max);
  grid.t = VectorX<Scalar>::LinSpaced(t_points, 0, 1);
  grid.t(t_points - 1) = 1;
  grid.density.resize(t_points, x_points);
  VectorX<Scalar> point(1);
  for (Eigen::Index i = 0; i < t_points; ++i) {
    VectorX<Scalar> logs(x_points);
    for (Eigen::Index j = 0; j < x_points; ++j) {
      point(0) = grid.x(j);
      logs(j) = path.log_t(point, grid.t(i));
    }
    const VectorX<Scalar> w = (logs.array() - logs.maxCoeff()).exp().matrix();
    grid.density.row(i) = (w / w.sum()).transpose();
  }
  return grid;
}

}  // namespace pathflow
