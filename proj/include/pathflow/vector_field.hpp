#pragma once

#include "pathflow/path.hpp"
#include "pathflow/rng.hpp"
#include "pathflow/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>

namespace pathflow {

/// One-hidden-layer sigmoid vector field φ(x) = W₂ σ(W₁ x + b₁) + b₂.
///
/// The same type doubles as the container for parameter gradients and momentum buffers,
/// so all parameter arithmetic stays in Eigen expressions.
template <typename Scalar>
class MlpVectorField {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using Particles = ParticleMatrix<Scalar>;
  using VectorRef = Eigen::Ref<const Vector>;

  MlpVectorField() = default;

  /// All-zero field with input/output dimension `dim` and `hidden` units.
  MlpVectorField(Eigen::Index dim, Eigen::Index hidden)
      : w1(Matrix::Zero(hidden, dim)), b1(Vector::Zero(hidden)), w2(Matrix::Zero(dim, hidden)), b2(Vector::Zero(dim)) {
    internal::require(dim > 0 && hidden > 0, "MlpVectorField: dimensions must be positive");
  }

  /// Parameters drawn i.i.d. uniform in [-scale, scale].
  static MlpVectorField random_uniform(Eigen::Index dim, Eigen::Index hidden, Scalar scale, std::uint64_t seed) {
    MlpVectorField f(dim, hidden);
    auto gen = particle_generator(seed, kFieldInitStream, 0);
    std::uniform_real_distribution<Scalar> uniform(-scale, scale);
    auto fill = [&](auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(gen);
    };
    fill(f.w1);
    fill(f.b1);
    fill(f.w2);
    fill(f.b2);
    return f;
  }

  Eigen::Index dimension() const { return w1.cols(); }
  Eigen::Index hidden() const { return w1.rows(); }
  Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  Vector evaluate(const VectorRef& x) const {
    internal::require_dimension(x.size(), dimension(), "MlpVectorField::evaluate");
    const Vector h = sigmoid((w1 * x + b1).array()).matrix();
    return w2 * h + b2;
  }

  /// Σᵢ ∂φᵢ/∂xᵢ = trace(W₂ diag(g) W₁) with g = σ'(W₁x + b₁), in O(H·d).
  Scalar divergence(const VectorRef& x) const {
    internal::require_dimension(x.size(), dimension(), "MlpVectorField::divergence");
    const auto h = sigmoid((w1 * x + b1).array());
    return (h * (1 - h)).matrix().dot(trace_weights());
  }

  Particles evaluate_batch(const Particles& x) const {
    internal::require_dimension(x.cols(), dimension(), "MlpVectorField::evaluate_batch");
    const Matrix h = sigmoid(((x * w1.transpose()).rowwise() + b1.transpose()).array()).matrix();
    return (h * w2.transpose()).rowwise() + b2.transpose();
  }

  Vector divergence_batch(const Particles& x) const {
    internal::require_dimension(x.cols(), dimension(), "MlpVectorField::divergence_batch");
    const auto h = sigmoid(((x * w1.transpose()).rowwise() + b1.transpose()).array()).eval();
    return (h * (1 - h)).matrix() * trace_weights();
  }

  /// cₕ = Σₖ W₂(k,h) W₁(h,k); the divergence is Σₕ σ'(aₕ) cₕ.
  Vector trace_weights() const { return (w2.transpose().array() * w1.array()).rowwise().sum().matrix(); }

  // Parameter-space arithmetic used by the optimizer.
  MlpVectorField& operator+=(const MlpVectorField& o) {
    w1 += o.w1;
    b1 += o.b1;
    w2 += o.w2;
    b2 += o.b2;
    return *this;
  }

  MlpVectorField& operator*=(Scalar s) {
    w1 *= s;
    b1 *= s;
    w2 *= s;
    b2 *= s;
    return *this;
  }

  friend MlpVectorField operator*(Scalar s, MlpVectorField f) { return f *= s; }

  Vector flatten() const {
    Vector out(parameter_count());
    Eigen::Index k = 0;
    for (const Matrix* m : {&w1, &w2}) {
      out.segment(k, m->size()) = m->reshaped();
      k += m->size();
    }
    out.segment(k, b1.size()) = b1;
    k += b1.size();
    out.segment(k, b2.size()) = b2;
    return out;
  }

  void unflatten(const VectorRef& flat) {
    internal::require_dimension(flat.size(), parameter_count(), "MlpVectorField::unflatten");
    Eigen::Index k = 0;
    for (Matrix* m : {&w1, &w2}) {
      m->reshaped() = flat.segment(k, m->size());
      k += m->size();
    }
    b1 = flat.segment(k, b1.size());
    k += b1.size();
    b2 = flat.segment(k, b2.size());
  }

  bool all_finite() const { return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite(); }

  Matrix w1;  // H x d
  Vector b1;  // H
  Matrix w2;  // d x H
  Vector b2;  // d

 private:
  template <typename Derived>
  static auto sigmoid(const Eigen::ArrayBase<Derived>& a) {
    return (1 + (-a).exp()).inverse();
  }
};

/// Path quantities at every particle for one time slice; independent of the field.
template <typename Scalar>
struct PathBatch {
  ParticleMatrix<Scalar> grad;  // ∇ln p̂ₜ per particle
  VectorX<Scalar> dt;           // ∂ₜ ln p̂ₜ per particle
};

template <typename Scalar>
PathBatch<Scalar> evaluate_path(const GuidePath<Scalar>& path, const ParticleMatrix<Scalar>& particles, Scalar t) {
  internal::require_dimension(particles.cols(), path.dimension(), "evaluate_path");
  PathBatch<Scalar> batch{ParticleMatrix<Scalar>(particles.rows(), particles.cols()), VectorX<Scalar>(particles.rows())};
  for (Eigen::Index i = 0; i < particles.rows(); ++i) {
    const PathTerms<Scalar> terms = path.terms(particles.row(i).transpose(), t);
    batch.grad.row(i) = terms.grad.transpose();
    batch.dt(i) = terms.dt;
  }
  return batch;
}

/// r(x, φ) = ∂ₜ ln p̂ₜ(x) + ∇ln p̂ₜ(x)·φ(x) + ∇·φ(x).
template <typename Scalar>
Scalar residual(const MlpVectorField<Scalar>& field, const GuidePath<Scalar>& path,
                const Eigen::Ref<const VectorX<Scalar>>& x, Scalar t) {
  const PathTerms<Scalar> terms = path.terms(x, t);
  return terms.dt + terms.grad.dot(field.evaluate(x)) + field.divergence(x);
}

template <typename Scalar>
VectorX<Scalar> residual_batch(const MlpVectorField<Scalar>& field, const ParticleMatrix<Scalar>& particles,
                               const PathBatch<Scalar>& batch) {
  const ParticleMatrix<Scalar> phi = field.evaluate_batch(particles);
  return batch.dt + (batch.grad.array() * phi.array()).rowwise().sum().matrix() + field.divergence_batch(particles);
}

/// Lₜ(θ) = Σᵢ |r(xᵢ, φ) − (1/N) Σⱼ ∂ₜ ln p̂ₜ(xⱼ)|², summed in particle order.
template <typename Scalar>
Scalar loss(const MlpVectorField<Scalar>& field, const ParticleMatrix<Scalar>& particles,
            const PathBatch<Scalar>& batch) {
  internal::require(particles.rows() >= 1, "loss: empty particle ensemble");
  const Scalar mean_dt = batch.dt.mean();
  return (residual_batch(field, particles, batch).array() - mean_dt).square().sum();
}

template <typename Scalar>
Scalar loss(const MlpVectorField<Scalar>& field, const GuidePath<Scalar>& path, const ParticleMatrix<Scalar>& particles,
            Scalar t) {
  internal::require(particles.rows() >= 1, "loss: empty particle ensemble");
  return loss(field, particles, evaluate_path(path, particles, t));
}

template <typename Scalar>
struct LossEvaluation {
  Scalar loss;
  MlpVectorField<Scalar> gradient;
};

/// Loss and its exact gradient with respect to (W₁, b₁, W₂, b₂).
///
/// With q = s·φ(x) + ∇·φ(x), s = ∇ln p̂ₜ(x), a = W₁x + b₁, h = σ(a), g = h(1−h)
/// and c the trace weights:
///   ∂q/∂b₂ = s,   ∂q/∂W₂(k,h) = sₖ hₕ + gₕ W₁(h,k),
///   ∂q/∂aₕ = (W₂ᵀs)ₕ gₕ + cₕ gₕ (1 − 2hₕ),   ∂q/∂W₁(h,k) = ∂q/∂aₕ xₖ + gₕ W₂(k,h).
/// The centering mean does not depend on θ.
template <typename Scalar>
LossEvaluation<Scalar> loss_and_gradient(const MlpVectorField<Scalar>& field, const ParticleMatrix<Scalar>& particles,
                                         const PathBatch<Scalar>& batch) {
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;
  internal::require(particles.rows() >= 1, "loss_and_gradient: empty particle ensemble");
  internal::require_dimension(particles.cols(), field.dimension(), "loss_and_gradient");

  const Matrix pre = (particles * field.w1.transpose()).rowwise() + field.b1.transpose();
  const Matrix h = (1 + (-pre.array()).exp()).inverse().matrix();
  const Matrix g = (h.array() * (1 - h.array())).matrix();
  const Vector c = field.trace_weights();

  const ParticleMatrix<Scalar> phi = (h * field.w2.transpose()).rowwise() + field.b2.transpose();
  const Vector r = batch.dt + (batch.grad.array() * phi.array()).rowwise().sum().matrix() + g * c;
  const Vector centered = r.array() - batch.dt.mean();
  const Vector e = 2 * centered;

  LossEvaluation<Scalar> out{centered.squaredNorm(), MlpVectorField<Scalar>()};
  auto& grad = out.gradient;
  const Vector ge = g.transpose() * e;

  grad.b2 = batch.grad.transpose() * e;
  grad.w2 = batch.grad.transpose() * (h.array().colwise() * e.array()).matrix();
  grad.w2.array() += field.w1.transpose().array().rowwise() * ge.transpose().array();

  const Matrix da = ((batch.grad * field.w2).array() * g.array() +
                     (g.array() * (1 - 2 * h.array())).rowwise() * c.transpose().array())
                        .matrix();
  grad.b1 = da.transpose() * e;
  grad.w1 = (da.array().colwise() * e.array()).matrix().transpose() * particles;
  grad.w1.array() += field.w2.transpose().array().colwise() * ge.array();
  return out;
}

template <typename Scalar>
MlpVectorField<Scalar> loss_gradient(const MlpVectorField<Scalar>& field, const GuidePath<Scalar>& path,
                                     const ParticleMatrix<Scalar>& particles, Scalar t) {
  return loss_and_gradient(field, particles, evaluate_path(path, particles, t)).gradient;
}

enum class Optimizer { kGradientDescent, kAdam };

template <typename Scalar>
struct TrainOptions {
  Scalar learning_rate = Scalar(1e-3);  // η
  long max_steps = 100;                 // M
  Scalar threshold = Scalar(1e-4);      // ε
  Scalar momentum = 0;                  // heavy-ball; 0 is plain gradient descent
  Optimizer optimizer = Optimizer::kGradientDescent;
  Scalar adam_beta1 = Scalar(0.9);
  Scalar adam_beta2 = Scalar(0.999);
  Scalar adam_epsilon = Scalar(1e-8);
};

template <typename Scalar>
struct TrainResult {
  MlpVectorField<Scalar> field;
  Scalar final_loss;
  long steps;
};

/// Full-batch gradient descent (or Adam) on Lₜ for at most `max_steps` updates, stopping as soon as
/// the loss falls below the threshold. The returned field warm-starts the next time step.
template <typename Scalar>
TrainResult<Scalar> train_at_time(MlpVectorField<Scalar> field, const ParticleMatrix<Scalar>& particles,
                                  const PathBatch<Scalar>& batch, Scalar t, const TrainOptions<Scalar>& options) {
  internal::require(options.learning_rate > 0, "train_at_time: learning rate must be positive");
  internal::require(options.max_steps >= 1, "train_at_time: max_steps must be at least 1");
  internal::require(options.threshold >= 0, "train_at_time: threshold must be nonnegative");

  MlpVectorField<Scalar> velocity;
  if (options.momentum != 0) velocity = Scalar(0) * field;
  // Adam moments live on the flattened parameter vector and restart at every call.
  VectorX<Scalar> first;
  VectorX<Scalar> second;
  if (options.optimizer == Optimizer::kAdam) {
    first = VectorX<Scalar>::Zero(field.parameter_count());
    second = VectorX<Scalar>::Zero(field.parameter_count());
  }
  long steps = 0;
  for (;;) {
    LossEvaluation<Scalar> eval = loss_and_gradient(field, particles, batch);
    if (!std::isfinite(eval.loss)) {
      throw TrainingDivergence("vector-field training diverged at t=" + std::to_string(t) + ", step " +
                                   std::to_string(steps),
                               static_cast<double>(t), steps, static_cast<double>(eval.loss));
    }
    if (eval.loss < options.threshold || steps == options.max_steps) return {std::move(field), eval.loss, steps};
    ++steps;
    if (options.optimizer == Optimizer::kAdam) {
      const VectorX<Scalar> g = eval.gradient.flatten();
      first = options.adam_beta1 * first + (1 - options.adam_beta1) * g;
      second = options.adam_beta2 * second + (1 - options.adam_beta2) * g.cwiseAbs2();
      const Scalar c1 = 1 - std::pow(options.adam_beta1, static_cast<Scalar>(steps));
      const Scalar c2 = 1 - std::pow(options.adam_beta2, static_cast<Scalar>(steps));
      const VectorX<Scalar> update =
          -options.learning_rate * (first / c1).array() / ((second / c2).array().sqrt() + options.adam_epsilon);
      eval.gradient.unflatten(update);
      field += eval.gradient;
      continue;
    }
    eval.gradient *= -options.learning_rate;
    if (options.momentum != 0) {
      velocity *= options.momentum;
      velocity += eval.gradient;
      field += velocity;
    } else {
      field += eval.gradient;
    }
  }
}

template <typename Scalar>
TrainResult<Scalar> train_at_time(MlpVectorField<Scalar> field, const GuidePath<Scalar>& path,
                                  const ParticleMatrix<Scalar>& particles, Scalar t,
                                  const TrainOptions<Scalar>& options) {
  return train_at_time(std::move(field), particles, evaluate_path(path, particles, t), t, options);
}

}  // namespace pathflow
