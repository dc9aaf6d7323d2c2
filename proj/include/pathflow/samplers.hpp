#pragma once

#include "pathflow/path.hpp"
#include "pathflow/rng.hpp"
#include "pathflow/targets.hpp"
#include "pathflow/types.hpp"
#include "pathflow/vector_field.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace pathflow {

/// One row of a sampler trace. `iteration` counts particle-position updates so far
/// (Euler moves and Langevin steps); gradient steps spent training the field are
/// counted separately in `train_steps`.
struct TraceRow {
  long iteration = 0;
  double t = 0;
  double dt = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  long train_steps = 0;
};

/// Final particles of a run together with the seed that produced them and the trace.
template <typename Scalar>
struct ParticleEnsemble {
  ParticleMatrix<Scalar> positions;
  std::uint64_t seed = 0;
  std::vector<TraceRow> history;
  long iterations = 0;
  long train_steps = 0;
};

template <typename Scalar>
using TraceObserver = std::function<void(const TraceRow&, const ParticleMatrix<Scalar>&)>;

template <typename Scalar>
struct PgpsConfig {
  Scalar psi = Scalar(0.1);                              // particle step size ψ
  Scalar dt_max = std::numeric_limits<Scalar>::infinity();  // Δt'
  TrainOptions<Scalar> train;                            // η, M, ε, momentum
  Eigen::Index hidden = 64;                              // H
  Scalar init_scale = Scalar(0.05);
  long adjust_steps = 0;                                 // M'
  Scalar adjust_delta = Scalar(1e-2);                    // δ
  Scalar alpha = 1;
  Scalar beta = Scalar(0.8);
  Scalar tf_time_step = Scalar(0.01);                    // grid step of the training-free variant
  long iteration_budget = 0;                             // 0: unlimited
  std::uint64_t seed = 0;

  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
    if (!(psi > 0)) fail("psi", "must be positive");
    if (!(dt_max > 0)) fail("dt_max", "must be positive");
    if (!(train.learning_rate > 0)) fail("eta", "must be positive");
    if (train.max_steps < 1) fail("max_train_steps", "must be at least 1");
    if (!(train.threshold >= 0)) fail("epsilon", "must be nonnegative");
    if (!(train.momentum >= 0 && train.momentum < 1)) fail("momentum", "must lie in [0, 1)");
    if (hidden < 1) fail("hidden", "must be at least 1");
    if (!(init_scale >= 0)) fail("init_scale", "must be nonnegative");
    if (adjust_steps < 0) fail("adjust_steps", "must be nonnegative");
    if (!(adjust_delta > 0)) fail("adjust_delta", "must be positive");
    if (!(alpha >= 0 && alpha <= 1)) fail("alpha", "must lie in [0, 1]");
    if (!(beta > 0 && beta <= 1)) fail("beta", "must lie in (0, 1]");
    if (!(tf_time_step > 0 && tf_time_step <= 1)) fail("tf_time_step", "must lie in (0, 1]");
    if (iteration_budget < 0) fail("iterations", "must be nonnegative");
    if (iteration_budget > 0 && iteration_budget < 1 + adjust_steps) {
      fail("iterations", "budget smaller than one PGPS step (1 + adjust_steps)");
    }
  }
};

/// Step size and iteration budget of unadjusted Langevin dynamics.
template <typename Scalar>
struct LangevinConfig {
  Scalar step_size = Scalar(1e-2);
  long iterations = 1000;
  std::uint64_t seed = 0;
};

template <typename Scalar>
struct SvgdConfig {
  Scalar step_size = Scalar(1e-2);
  long iterations = 1000;
};

namespace internal {

template <typename Scalar>
void require_finite_particles(const ParticleMatrix<Scalar>& x, const std::string& where) {
  if (!x.allFinite()) throw SamplerError("non-finite particle position after " + where);
}

}  // namespace internal

/// Δt = Nψ / Σᵢ‖φ(xᵢ)‖, clamped to min{Δt, 1 − t, Δt'}. A vanishing field
/// (Σ‖φ‖ < 1e-12) skips the ratio.
template <typename Scalar>
Scalar adaptive_time_step(Scalar t, const ParticleMatrix<Scalar>& field_values, Scalar psi, Scalar dt_max) {
  internal::require(t >= 0 && t < 1, "adaptive_time_step: t must lie in [0, 1)");
  internal::require(field_values.rows() >= 1, "adaptive_time_step: no particles");
  const Scalar total = field_values.rowwise().norm().sum();
  const Scalar limit = std::min<Scalar>(1 - t, dt_max);
  if (total < Scalar(1e-12)) return limit;
  return std::min(static_cast<Scalar>(field_values.rows()) * psi / total, limit);
}

template <typename Scalar>
Scalar adaptive_time_step(Scalar t, const ParticleMatrix<Scalar>& particles, const MlpVectorField<Scalar>& field,
                          Scalar psi, Scalar dt_max) {
  return adaptive_time_step(t, field.evaluate_batch(particles), psi, dt_max);
}

/// `steps` unadjusted Langevin steps x ← x + δ∇ln p̂(x) + √(2δ) ξ against `target`.
/// Step k draws particle i's noise from stream (seed, first_stream + k, i).
template <typename Scalar>
ParticleMatrix<Scalar> langevin_adjust(ParticleMatrix<Scalar> x, const TargetDensity<Scalar>& target, Scalar delta,
                                       long steps, std::uint64_t seed, std::uint64_t first_stream,
                                       bool with_noise = true) {
  internal::require(delta >= 0 && steps >= 0, "langevin_adjust: delta and steps must be nonnegative");
  internal::require_dimension(x.cols(), target.dimension(), "langevin_adjust");
  if (delta == 0 || steps == 0) return x;
  const Scalar noise_scale = std::sqrt(2 * delta);
  for (long k = 0; k < steps; ++k) {
    const auto stream = first_stream + static_cast<std::uint64_t>(k);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      VectorX<Scalar> next = x.row(i).transpose() + delta * target.grad_log_unnorm(x.row(i).transpose());
      if (with_noise) {
        auto gen = particle_generator(seed, stream, static_cast<std::uint64_t>(i));
        std::normal_distribution<Scalar> normal;
        for (Eigen::Index c = 0; c < next.size(); ++c) next(c) += noise_scale * normal(gen);
      }
      x.row(i) = next.transpose();
    }
    internal::require_finite_particles(x, "Langevin step " + std::to_string(k + 1));
  }
  return x;
}

/// Path-guided particle sampling: at each time, train the field on the current particles
/// (warm-started), pick Δt adaptively, move the particles by an Euler step, then optionally
/// run Langevin adjustment against p̂ₜ₊Δₜ. Terminates exactly at t = 1.
///
/// With a positive iteration budget Δt is additionally floored at (1 − t)/k, where k is the
/// number of whole PGPS steps the remaining budget still affords, so the run always ends
/// at t = 1 within budget.
template <typename Scalar>
ParticleEnsemble<Scalar> pgps_run(const GuidePath<Scalar>& path, const PgpsConfig<Scalar>& config,
                                  ParticleMatrix<Scalar> particles, const TraceObserver<Scalar>& observer = {}) {
  config.validate();
  internal::require_dimension(particles.cols(), path.dimension(), "pgps_run particles");
  internal::require(particles.rows() >= 1, "pgps_run: empty particle ensemble");
  internal::require_finite_particles(particles, "initialization");

  ParticleEnsemble<Scalar> out;
  out.seed = config.seed;
  MlpVectorField<Scalar> field =
      MlpVectorField<Scalar>::random_uniform(path.dimension(), config.hidden, config.init_scale, config.seed);
  const long per_step = 1 + config.adjust_steps;
  Scalar t = 0;
  while (t < 1) {
    const PathBatch<Scalar> batch = evaluate_path(path, particles, t);
    TrainResult<Scalar> trained = train_at_time(std::move(field), particles, batch, t, config.train);
    field = std::move(trained.field);
    out.train_steps += trained.steps;

    const ParticleMatrix<Scalar> phi = field.evaluate_batch(particles);
    Scalar dt = adaptive_time_step(t, phi, config.psi, config.dt_max);
    if (config.iteration_budget > 0) {
      const long affordable = std::max<long>(1, (config.iteration_budget - out.iterations) / per_step);
      dt = affordable == 1 ? 1 - t : std::max(dt, (1 - t) / static_cast<Scalar>(affordable));
    }
    particles += dt * phi;
    internal::require_finite_particles(particles, "Euler move at t=" + std::to_string(t));
    t = (dt >= 1 - t) ? Scalar(1) : std::min<Scalar>(t + dt, 1);
    out.iterations += 1;

    if (config.adjust_steps > 0) {
      particles = langevin_adjust(particles, PathSlice<Scalar>(path, t), config.adjust_delta, config.adjust_steps,
                                  config.seed, static_cast<std::uint64_t>(out.iterations));
      out.iterations += config.adjust_steps;
    }
    TraceRow row{out.iterations, static_cast<double>(t), static_cast<double>(dt),
                 static_cast<double>(trained.final_loss), trained.steps};
    out.history.push_back(row);
    if (observer) observer(row, particles);
  }
  out.positions = std::move(particles);
  return out;
}

/// Training-free variant: Langevin adjustment against p̂ₜ on the uniform grid
/// t = h, 2h, ..., 1 with no learned field.
template <typename Scalar>
ParticleEnsemble<Scalar> tf_pgps_run(const GuidePath<Scalar>& path, const PgpsConfig<Scalar>& config,
                                     ParticleMatrix<Scalar> particles, const TraceObserver<Scalar>& observer = {}) {
  config.validate();
  if (config.adjust_steps < 1) throw ConfigError("adjust_steps: training-free sampling needs at least one step");
  internal::require_dimension(particles.cols(), path.dimension(), "tf_pgps_run particles");

  ParticleEnsemble<Scalar> out;
  out.seed = config.seed;
  const auto grid_points = static_cast<long>(std::ceil(1 / config.tf_time_step - Scalar(1e-9)));
  Scalar previous = 0;
  for (long k = 1; k <= grid_points; ++k) {
    const Scalar t = k == grid_points ? Scalar(1) : std::min<Scalar>(static_cast<Scalar>(k) * config.tf_time_step, 1);
    particles = langevin_adjust(particles, PathSlice<Scalar>(path, t), config.adjust_delta, config.adjust_steps,
                                config.seed, static_cast<std::uint64_t>(out.iterations));
    out.iterations += config.adjust_steps;
    TraceRow row{out.iterations, static_cast<double>(t), static_cast<double>(t - previous)};
    previous = t;
    out.history.push_back(row);
    if (observer) observer(row, particles);
  }
  out.positions = std::move(particles);
  return out;
}

/// Unadjusted Langevin dynamics on the target for a fixed number of iterations.
template <typename Scalar>
ParticleEnsemble<Scalar> ld_run(const TargetDensity<Scalar>& target, const LangevinConfig<Scalar>& config,
                                ParticleMatrix<Scalar> particles, const TraceObserver<Scalar>& observer = {}) {
  if (!(config.step_size > 0)) throw ConfigError("step_size: must be positive");
  if (config.iterations < 0) throw ConfigError("iterations: must be nonnegative");
  ParticleEnsemble<Scalar> out;
  out.seed = config.seed;
  for (long k = 0; k < config.iterations; ++k) {
    particles = langevin_adjust(particles, target, config.step_size, 1, config.seed, static_cast<std::uint64_t>(k));
    out.iterations += 1;
    TraceRow row{out.iterations, static_cast<double>(k + 1) / static_cast<double>(config.iterations),
                 1.0 / static_cast<double>(config.iterations)};
    out.history.push_back(row);
    if (observer) observer(row, particles);
  }
  out.positions = std::move(particles);
  return out;
}

/// RBF bandwidth med²/ln(N + 1) over pairwise distances; 1 when degenerate.
template <typename Scalar>
Scalar svgd_bandwidth(const MatrixX<Scalar>& squared_distances) {
  const Eigen::Index n = squared_distances.rows();
  if (n < 2) return 1;
  std::vector<Scalar> pairs;
  pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.push_back(squared_distances(i, j));
  }
  const std::size_t mid = pairs.size() / 2;
  std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid), pairs.end());
  Scalar median = pairs[mid];
  if (pairs.size() % 2 == 0) {
    median = (median + *std::max_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid))) / 2;
  }
  const Scalar h = median / std::log(static_cast<Scalar>(n) + 1);
  return h > Scalar(1e-12) ? h : Scalar(1);
}

/// One SVGD direction (1/N) Σⱼ [k(xⱼ, xᵢ)∇ln p̂(xⱼ) + ∇ₓⱼ k(xⱼ, xᵢ)] for every particle,
/// with k(x, y) = exp(−‖x − y‖²/h).
template <typename Scalar>
ParticleMatrix<Scalar> svgd_direction(const TargetDensity<Scalar>& target, const ParticleMatrix<Scalar>& x) {
  const Eigen::Index n = x.rows();
  MatrixX<Scalar> sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sq(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) sq(i, j) = sq(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  const Scalar h = svgd_bandwidth(sq);
  const MatrixX<Scalar> kernel = (-sq.array() / h).exp().matrix();
  ParticleMatrix<Scalar> scores(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) scores.row(i) = target.grad_log_unnorm(x.row(i).transpose()).transpose();
  const VectorX<Scalar> kernel_sum = kernel.rowwise().sum();
  // Σⱼ ∇ₓⱼ k(xⱼ, xᵢ) = (2/h) Σⱼ k(xᵢ, xⱼ)(xᵢ − xⱼ)
  ParticleMatrix<Scalar> repulsion = x.array().colwise() * kernel_sum.array();
  repulsion -= kernel * x;
  return (kernel * scores + (2 / h) * repulsion) / static_cast<Scalar>(n);
}

template <typename Scalar>
ParticleEnsemble<Scalar> svgd_run(const TargetDensity<Scalar>& target, const SvgdConfig<Scalar>& config,
                                  ParticleMatrix<Scalar> particles, const TraceObserver<Scalar>& observer = {}) {
  if (!(config.step_size > 0)) throw ConfigError("step_size: must be positive");
  if (config.iterations < 0) throw ConfigError("iterations: must be nonnegative");
  internal::require(particles.rows() >= 1, "svgd_run: empty particle ensemble");
  internal::require_dimension(particles.cols(), target.dimension(), "svgd_run particles");
  ParticleEnsemble<Scalar> out;
  for (long k = 0; k < config.iterations; ++k) {
    particles += config.step_size * svgd_direction(target, particles);
    internal::require_finite_particles(particles, "SVGD iteration " + std::to_string(k + 1));
    out.iterations += 1;
    TraceRow row{out.iterations, static_cast<double>(k + 1) / static_cast<double>(config.iterations),
                 1.0 / static_cast<double>(config.iterations)};
    out.history.push_back(row);
    if (observer) observer(row, particles);
  }
  out.positions = std::move(particles);
  return out;
}

}  // namespace pathflow
