#pragma once

#include "pathflow/rng.hpp"
#include "pathflow/targets.hpp"
#include "pathflow/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace pathflow {

/// Fraction of 1D samples strictly above `threshold`.
template <typename Scalar>
Scalar score1(const Eigen::Ref<const VectorX<Scalar>>& samples, Scalar threshold = 5) {
  internal::require(samples.size() > 0, "score1: no samples");
  return static_cast<Scalar>((samples.array() > threshold).count()) / static_cast<Scalar>(samples.size());
}

/// Fraction of 1D samples strictly below `threshold`.
template <typename Scalar>
Scalar score2(const Eigen::Ref<const VectorX<Scalar>>& samples, Scalar threshold = 0) {
  internal::require(samples.size() > 0, "score2: no samples");
  return static_cast<Scalar>((samples.array() < threshold).count()) / static_cast<Scalar>(samples.size());
}

/// Mode centers, capture radius and the true in-ball probabilities ωⱼ.
template <typename Scalar>
struct ModeSpec {
  std::vector<VectorX<Scalar>> centers;
  Scalar radius = 1;
  std::vector<Scalar> true_weights;
};

/// ω̂ⱼ = #{i : ‖xᵢ − μⱼ‖ < radius} / N.
template <typename Scalar>
std::vector<Scalar> estimated_weights(const ParticleMatrix<Scalar>& samples, const ModeSpec<Scalar>& modes) {
  internal::require(samples.rows() > 0, "estimated_weights: no samples");
  std::vector<Scalar> out;
  for (const auto& mu : modes.centers) {
    internal::require_dimension(mu.size(), samples.cols(), "estimated_weights center");
    const auto inside = ((samples.rowwise() - mu.transpose()).rowwise().norm().array() < modes.radius).count();
    out.push_back(static_cast<Scalar>(inside) / static_cast<Scalar>(samples.rows()));
  }
  return out;
}

/// e = √(Σⱼ (ω̂ⱼ − ωⱼ)²).
template <typename Scalar>
Scalar weight_mismatch(const ParticleMatrix<Scalar>& samples, const ModeSpec<Scalar>& modes) {
  internal::require(modes.centers.size() == modes.true_weights.size(), "weight_mismatch: weight count mismatch");
  const std::vector<Scalar> est = estimated_weights(samples, modes);
  Scalar sum = 0;
  for (std::size_t j = 0; j < est.size(); ++j) sum += (est[j] - modes.true_weights[j]) * (est[j] - modes.true_weights[j]);
  return std::sqrt(sum);
}

/// ωⱼ = P_target(‖x − μⱼ‖ < radius), estimated from `n` exact mixture draws.
template <typename Scalar>
ModeSpec<Scalar> mode_spec_from_mixture(const GaussianMixture<Scalar>& mixture, Scalar radius, Eigen::Index n,
                                        std::uint64_t seed) {
  ModeSpec<Scalar> spec;
  spec.radius = radius;
  for (const auto& c : mixture.components()) spec.centers.push_back(c.mean);
  spec.true_weights = estimated_weights(mixture.sample(n, seed), spec);
  return spec;
}

namespace internal {

// Quantile at level u ∈ (0, 1) of sorted data, interpolating linearly between order
// statistics placed at (i + 0.5)/n.
template <typename Scalar>
Scalar sorted_quantile(const std::vector<Scalar>& sorted, Scalar u) {
  const auto n = static_cast<Scalar>(sorted.size());
  const Scalar pos = std::clamp<Scalar>(u * n - Scalar(0.5), 0, n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const Scalar frac = pos - static_cast<Scalar>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace internal

/// Empirical q-Wasserstein distance between 1D samples through the sorted (quantile)
/// coupling. Unequal sizes are compared at max(n_a, n_b) interpolated quantile levels.
template <typename Scalar>
Scalar wasserstein_1d(const Eigen::Ref<const VectorX<Scalar>>& a, const Eigen::Ref<const VectorX<Scalar>>& b,
                      Scalar q = 2) {
  internal::require(a.size() > 0 && b.size() > 0, "wasserstein_1d: empty sample");
  internal::require(q >= 1, "wasserstein_1d: q must be at least 1");
  std::vector<Scalar> sa(a.data(), a.data() + a.size());
  std::vector<Scalar> sb(b.data(), b.data() + b.size());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const std::size_t m = std::max(sa.size(), sb.size());
  Scalar sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    Scalar va;
    Scalar vb;
    if (sa.size() == sb.size()) {
      va = sa[i];
      vb = sb[i];
    } else {
      const Scalar u = (static_cast<Scalar>(i) + Scalar(0.5)) / static_cast<Scalar>(m);
      va = internal::sorted_quantile(sa, u);
      vb = internal::sorted_quantile(sb, u);
    }
    sum += std::pow(std::abs(va - vb), q);
  }
  return std::pow(sum / static_cast<Scalar>(m), 1 / q);
}

/// Silverman's rule 1.06 σ̂ N^(−1/5); falls back to 1 for a degenerate sample.
template <typename Scalar>
Scalar silverman_bandwidth(const Eigen::Ref<const VectorX<Scalar>>& samples) {
  const auto n = static_cast<Scalar>(samples.size());
  if (samples.size() < 2) return 1;
  const Scalar sd = std::sqrt((samples.array() - samples.mean()).square().sum() / (n - 1));
  return sd > 0 ? Scalar(1.06) * sd * std::pow(n, Scalar(-0.2)) : Scalar(1);
}

/// Gaussian-kernel density estimate of 1D samples evaluated on `grid`.
template <typename Scalar>
VectorX<Scalar> density_estimate(const Eigen::Ref<const VectorX<Scalar>>& samples,
                                 const Eigen::Ref<const VectorX<Scalar>>& grid,
                                 std::optional<Scalar> bandwidth = std::nullopt) {
  internal::require(samples.size() > 0, "density_estimate: no samples");
  const Scalar h = bandwidth.value_or(silverman_bandwidth<Scalar>(samples));
  internal::require(h > 0, "density_estimate: bandwidth must be positive");
  const Scalar norm = 1 / (static_cast<Scalar>(samples.size()) * h * std::sqrt(2 * std::numbers::pi_v<Scalar>));
  VectorX<Scalar> out(grid.size());
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    out(g) = norm * ((samples.array() - grid(g)) / h).square().unaryExpr([](Scalar z) { return std::exp(-z / 2); }).sum();
  }
  return out;
}

template <typename Scalar>
struct CalibrationMetrics {
  Scalar ece;
  Scalar accuracy;
  Scalar nll;
};

/// Ensemble calibration for binary prediction. `probs` holds P(y = 1) with one row per
/// test sample and one column per particle; the ensemble prediction is the row mean.
/// ECE uses `bins` equal-width confidence bins on [0, 1].
template <typename Scalar>
CalibrationMetrics<Scalar> calibration_metrics(const MatrixX<Scalar>& probs, const VectorX<Scalar>& labels,
                                               int bins = 10) {
  internal::require(probs.rows() == labels.size() && probs.rows() > 0 && probs.cols() > 0,
                    "calibration_metrics: shape mismatch");
  internal::require(bins >= 1, "calibration_metrics: need at least one bin");
  internal::require(((probs.array() >= 0) && (probs.array() <= 1)).all(), "calibration_metrics: probabilities outside [0, 1]");
  const VectorX<Scalar> mean = probs.rowwise().mean();
  const auto n = static_cast<Scalar>(mean.size());
  std::vector<Scalar> bin_count(static_cast<std::size_t>(bins), 0);
  std::vector<Scalar> bin_correct(static_cast<std::size_t>(bins), 0);
  std::vector<Scalar> bin_confidence(static_cast<std::size_t>(bins), 0);
  Scalar correct = 0;
  Scalar nll = 0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const Scalar p = mean(i);
    const bool predict_one = p >= Scalar(0.5);
    const Scalar confidence = predict_one ? p : 1 - p;
    const bool hit = predict_one == (labels(i) == 1);
    const Scalar p_true = labels(i) == 1 ? p : 1 - p;
    nll -= std::log(std::max(p_true, std::numeric_limits<Scalar>::min()));
    correct += hit ? 1 : 0;
    const auto b = std::min(static_cast<std::size_t>(confidence * static_cast<Scalar>(bins)),
                            static_cast<std::size_t>(bins - 1));
    bin_count[b] += 1;
    bin_correct[b] += hit ? 1 : 0;
    bin_confidence[b] += confidence;
  }
  Scalar ece = 0;
  for (std::size_t b = 0; b < bin_count.size(); ++b) {
    if (bin_count[b] == 0) continue;
    ece += bin_count[b] / n * std::abs(bin_correct[b] / bin_count[b] - bin_confidence[b] / bin_count[b]);
  }
  return {ece, correct / n, nll / n};
}

/// Energy distance 2E‖X−Y‖ − E‖X−X'‖ − E‖Y−Y'‖ between two samples (V-statistic).
template <typename Scalar>
Scalar energy_distance(const ParticleMatrix<Scalar>& a, const ParticleMatrix<Scalar>& b) {
  internal::require(a.rows() > 0 && b.rows() > 0, "energy_distance: empty sample");
  internal::require_dimension(b.cols(), a.cols(), "energy_distance");
  auto mean_dist = [](const ParticleMatrix<Scalar>& u, const ParticleMatrix<Scalar>& v) {
    Scalar s = 0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) s += (v.rowwise() - u.row(i)).rowwise().norm().sum();
    return s / static_cast<Scalar>(u.rows() * v.rows());
  };
  return 2 * mean_dist(a, b) - mean_dist(a, a) - mean_dist(b, b);
}

/// Permutation p-value of the energy-distance two-sample test.
template <typename Scalar>
Scalar energy_test_pvalue(const ParticleMatrix<Scalar>& a, const ParticleMatrix<Scalar>& b, int permutations,
                          std::uint64_t seed) {
  const Scalar observed = energy_distance(a, b);
  ParticleMatrix<Scalar> pooled(a.rows() + b.rows(), a.cols());
  pooled << a, b;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pooled.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  auto gen = particle_generator(seed, kAuxiliaryStream, 0);
  int at_least = 0;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(order.begin(), order.end(), gen);
    ParticleMatrix<Scalar> pa(a.rows(), a.cols());
    ParticleMatrix<Scalar> pb(b.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) pa.row(i) = pooled.row(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < b.rows(); ++i) pb.row(i) = pooled.row(order[static_cast<std::size_t>(a.rows() + i)]);
    if (energy_distance(pa, pb) >= observed) ++at_least;
  }
  return static_cast<Scalar>(at_least + 1) / static_cast<Scalar>(permutations + 1);
}

}  // namespace pathflow
