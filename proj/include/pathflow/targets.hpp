#pragma once

#include "pathflow/rng.hpp"
#include "pathflow/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace pathflow {

/// Unnormalized log-density ln p̂ with its gradient. Only differences of log_unnorm
/// carry meaning; any constant offset is allowed.
template <typename Scalar>
class TargetDensity {
 public:
  using Vector = VectorX<Scalar>;
  using VectorRef = Eigen::Ref<const Vector>;

  virtual ~TargetDensity() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual Scalar log_unnorm(const VectorRef& x) const = 0;
  virtual Vector grad_log_unnorm(const VectorRef& x) const = 0;
};

template <typename Scalar>
using TargetPtr = std::shared_ptr<const TargetDensity<Scalar>>;

namespace internal {

template <typename Scalar>
Scalar log_sum_exp(const VectorX<Scalar>& values) {
  const Scalar top = values.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((values.array() - top).exp().sum());
}

template <typename Scalar>
Scalar log_two_pi() {
  return std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
}

}  // namespace internal

/// Isotropic Gaussian N(mean, std² I) used as the initial distribution p₀.
template <typename Scalar>
class InitialDistribution final : public TargetDensity<Scalar> {
 public:
  using typename TargetDensity<Scalar>::Vector;
  using typename TargetDensity<Scalar>::VectorRef;

  InitialDistribution(Vector mean, Scalar std) : mean_(std::move(mean)), std_(std) {
    internal::require(mean_.size() > 0, "InitialDistribution: empty mean");
    internal::require(std_ > 0 && std::isfinite(std_), "InitialDistribution: std must be positive");
  }

  static InitialDistribution standard(Eigen::Index dim, Scalar std = 1) { return {Vector::Zero(dim), std}; }

  Eigen::Index dimension() const override { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  Scalar std() const { return std_; }

  Scalar log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dimension(), "InitialDistribution::log_unnorm");
    const Scalar var = std_ * std_;
    const auto d = static_cast<Scalar>(dimension());
    return -(x - mean_).squaredNorm() / (2 * var) - d / 2 * (internal::log_two_pi<Scalar>() + std::log(var));
  }

  Vector grad_log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dimension(), "InitialDistribution::grad_log_unnorm");
    return (mean_ - x) / (std_ * std_);
  }

  /// n i.i.d. draws, one per row. Deterministic in (n, seed).
  ParticleMatrix<Scalar> sample(Eigen::Index n, std::uint64_t seed) const {
    ParticleMatrix<Scalar> out(n, dimension());
    for (Eigen::Index i = 0; i < n; ++i) {
      auto gen = particle_generator(seed, kInitialSampleStream, static_cast<std::uint64_t>(i));
      std::normal_distribution<Scalar> normal;
      for (Eigen::Index k = 0; k < dimension(); ++k) out(i, k) = mean_(k) + std_ * normal(gen);
    }
    return out;
  }

 private:
  Vector mean_;
  Scalar std_;
};

/// Normalized mixture of axis-aligned Gaussians.
template <typename Scalar>
class GaussianMixture final : public TargetDensity<Scalar> {
 public:
  using typename TargetDensity<Scalar>::Vector;
  using typename TargetDensity<Scalar>::VectorRef;

  struct Component {
    Vector mean;
    Vector variance;  // per axis
  };

  GaussianMixture(std::vector<Component> components, std::vector<Scalar> weights)
      : components_(std::move(components)), log_weights_(static_cast<Eigen::Index>(weights.size())) {
    internal::require(!components_.empty(), "GaussianMixture: no components");
    internal::require(components_.size() == weights.size(), "GaussianMixture: weight count mismatch");
    const Eigen::Index dim = components_.front().mean.size();
    internal::require(dim > 0, "GaussianMixture: empty mean");
    Scalar total = 0;
    for (std::size_t j = 0; j < components_.size(); ++j) {
      const auto& c = components_[j];
      internal::require_dimension(c.mean.size(), dim, "GaussianMixture component mean");
      internal::require_dimension(c.variance.size(), dim, "GaussianMixture component variance");
      internal::require((c.variance.array() > 0).all() && c.variance.allFinite(),
                        "GaussianMixture: variances must be positive");
      internal::require(weights[j] >= 0, "GaussianMixture: negative weight");
      total += weights[j];
      log_weights_(static_cast<Eigen::Index>(j)) = std::log(weights[j]);
    }
    internal::require(std::abs(total - 1) <= Scalar(1e-12), "GaussianMixture: weights must sum to 1");
    weights_ = std::move(weights);
    for (const auto& c : components_) {
      log_norm_.push_back(-Scalar(0.5) * (static_cast<Scalar>(dim) * internal::log_two_pi<Scalar>() +
                                         c.variance.array().log().sum()));
    }
  }

  /// Mixture of isotropic components with scalar standard deviations.
  static GaussianMixture isotropic(const std::vector<Vector>& means, const std::vector<Scalar>& stds,
                                   std::vector<Scalar> weights) {
    internal::require(means.size() == stds.size(), "GaussianMixture::isotropic: size mismatch");
    for (Scalar s : stds) internal::require(s > 0, "GaussianMixture::isotropic: stds must be positive");
    std::vector<Component> comps;
    for (std::size_t j = 0; j < means.size(); ++j) {
      comps.push_back({means[j], Vector::Constant(means[j].size(), stds[j] * stds[j])});
    }
    return GaussianMixture(std::move(comps), std::move(weights));
  }

  Eigen::Index dimension() const override { return components_.front().mean.size(); }
  const std::vector<Component>& components() const { return components_; }
  const std::vector<Scalar>& weights() const { return weights_; }

  Scalar log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dimension(), "GaussianMixture::log_unnorm");
    return internal::log_sum_exp<Scalar>(component_log_terms(x));
  }

  Vector grad_log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dimension(), "GaussianMixture::grad_log_unnorm");
    const Vector terms = component_log_terms(x);
    const Scalar top = terms.maxCoeff();
    const Vector resp = (terms.array() - top).exp().matrix();
    const Scalar norm = resp.sum();
    Vector grad = Vector::Zero(dimension());
    for (std::size_t j = 0; j < components_.size(); ++j) {
      const Scalar r = resp(static_cast<Eigen::Index>(j)) / norm;
      if (r == 0) continue;
      const auto& c = components_[j];
      grad.array() += r * (c.mean - x).array() / c.variance.array();
    }
    return grad;
  }

  /// Direct (exact) sampling, deterministic in (n, seed).
  ParticleMatrix<Scalar> sample(Eigen::Index n, std::uint64_t seed) const {
    ParticleMatrix<Scalar> out(n, dimension());
    for (Eigen::Index i = 0; i < n; ++i) {
      auto gen = particle_generator(seed, kTargetSampleStream, static_cast<std::uint64_t>(i));
      std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
      std::normal_distribution<Scalar> normal;
      const auto& c = components_[pick(gen)];
      for (Eigen::Index k = 0; k < dimension(); ++k) out(i, k) = c.mean(k) + std::sqrt(c.variance(k)) * normal(gen);
    }
    return out;
  }

 private:
  Vector component_log_terms(const VectorRef& x) const {
    Vector terms(static_cast<Eigen::Index>(components_.size()));
    for (std::size_t j = 0; j < components_.size(); ++j) {
      const auto& c = components_[j];
      const auto jj = static_cast<Eigen::Index>(j);
      terms(jj) = log_weights_(jj) + log_norm_[j] -
                  Scalar(0.5) * ((x - c.mean).array().square() / c.variance.array()).sum();
    }
    return terms;
  }

  std::vector<Component> components_;
  std::vector<Scalar> weights_;
  Vector log_weights_;
  std::vector<Scalar> log_norm_;
};

/// Bayesian logistic regression posterior over (weights, bias) with an isotropic
/// Gaussian prior. The parameter vector is [w_1, ..., w_df, bias].
template <typename Scalar>
class LogisticRegressionTarget final : public TargetDensity<Scalar> {
 public:
  using typename TargetDensity<Scalar>::Vector;
  using typename TargetDensity<Scalar>::VectorRef;
  using Matrix = MatrixX<Scalar>;

  LogisticRegressionTarget(Matrix features, Vector labels, Scalar prior_std)
      : features_(std::move(features)), labels_(std::move(labels)), prior_std_(prior_std) {
    internal::require(features_.rows() == labels_.size(), "LogisticRegressionTarget: row count mismatch");
    internal::require(features_.cols() > 0, "LogisticRegressionTarget: no feature columns");
    internal::require(prior_std_ > 0, "LogisticRegressionTarget: prior_std must be positive");
    internal::require(((labels_.array() == 0) || (labels_.array() == 1)).all(),
                      "LogisticRegressionTarget: labels must be 0 or 1");
  }

  Eigen::Index dimension() const override { return features_.cols() + 1; }
  Eigen::Index num_samples() const { return features_.rows(); }
  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  Scalar prior_std() const { return prior_std_; }

  Scalar log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dimension(), "LogisticRegressionTarget::log_unnorm");
    const Vector z = scores(x);
    Scalar loglik = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loglik += labels_(i) * z(i) - softplus(z(i));
    return loglik + log_prior(x);
  }

  Vector grad_log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dimension(), "LogisticRegressionTarget::grad_log_unnorm");
    const Vector z = scores(x);
    const Vector resid = labels_ - z.unaryExpr([](Scalar v) { return sigmoid(v); });
    Vector grad(dimension());
    grad.head(features_.cols()) = features_.transpose() * resid;
    grad(features_.cols()) = resid.sum();
    return grad - x / (prior_std_ * prior_std_);
  }

  Scalar log_prior(const VectorRef& x) const {
    const Scalar var = prior_std_ * prior_std_;
    return -x.squaredNorm() / (2 * var) -
           static_cast<Scalar>(dimension()) / 2 * (internal::log_two_pi<Scalar>() + std::log(var));
  }

  /// P(y = 1 | row) for every row of `inputs` under parameters x.
  Vector predict_proba(const VectorRef& x, const Matrix& inputs) const {
    internal::require_dimension(x.size(), dimension(), "LogisticRegressionTarget::predict_proba");
    internal::require_dimension(inputs.cols(), features_.cols(), "LogisticRegressionTarget::predict_proba inputs");
    const Vector z = (inputs * x.head(features_.cols())).array() + x(features_.cols());
    return z.unaryExpr([](Scalar v) { return sigmoid(v); });
  }

  static Scalar sigmoid(Scalar z) {
    if (z >= 0) return 1 / (1 + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (1 + e);
  }

  static Scalar softplus(Scalar z) { return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z))); }

 private:
  Vector scores(const VectorRef& x) const {
    return (features_ * x.head(features_.cols())).array() + x(features_.cols());
  }

  Matrix features_;
  Vector labels_;
  Scalar prior_std_;
};

/// A target whose log-density is offset by a constant. Gradients pass through unchanged.
template <typename Scalar>
class ShiftedTarget final : public TargetDensity<Scalar> {
 public:
  using typename TargetDensity<Scalar>::Vector;
  using typename TargetDensity<Scalar>::VectorRef;

  ShiftedTarget(TargetPtr<Scalar> base, Scalar offset) : base_(std::move(base)), offset_(offset) {}

  Eigen::Index dimension() const override { return base_->dimension(); }
  Scalar log_unnorm(const VectorRef& x) const override { return base_->log_unnorm(x) + offset_; }
  Vector grad_log_unnorm(const VectorRef& x) const override { return base_->grad_log_unnorm(x); }

 private:
  TargetPtr<Scalar> base_;
  Scalar offset_;
};

/// Target assembled from two callables.
template <typename Scalar>
class FunctionTarget final : public TargetDensity<Scalar> {
 public:
  using typename TargetDensity<Scalar>::Vector;
  using typename TargetDensity<Scalar>::VectorRef;
  using LogFn = std::function<Scalar(const VectorRef&)>;
  using GradFn = std::function<Vector(const VectorRef&)>;

  FunctionTarget(Eigen::Index dim, LogFn log_fn, GradFn grad_fn)
      : dim_(dim), log_fn_(std::move(log_fn)), grad_fn_(std::move(grad_fn)) {}

  Eigen::Index dimension() const override { return dim_; }

  Scalar log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dim_, "FunctionTarget::log_unnorm");
    return log_fn_(x);
  }

  Vector grad_log_unnorm(const VectorRef& x) const override {
    internal::require_dimension(x.size(), dim_, "FunctionTarget::grad_log_unnorm");
    return grad_fn_(x);
  }

 private:
  Eigen::Index dim_;
  LogFn log_fn_;
  GradFn grad_fn_;
};

}  // namespace pathflow
