#pragma once

#include "pathflow/config.hpp"
#include "pathflow/path.hpp"
#include "pathflow/targets.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace pathflow {

using NamedValues = std::vector<std::pair<std::string, double>>;

/// A concrete sampling problem for one seed: endpoints, guide path and the metrics the
/// experiment reports per iteration and at the end.
struct Problem {
  std::shared_ptr<const InitialDistribution<double>> initial;
  TargetPtr<double> target;
  std::shared_ptr<const LwsPath<double>> path;
  std::vector<std::string> trace_metric_names;
  std::function<std::vector<double>(const ParticleMatrix<double>&)> trace_metrics;
  std::function<NamedValues(const ParticleMatrix<double>&)> final_metrics;
};

struct RunOutcome {
  std::string sampler;
  std::uint64_t seed = 0;
  long iterations = 0;
  long train_steps = 0;
  double wall_seconds = 0;
  NamedValues metrics;
  ParticleMatrix<double> positions;
};

/// `$PATHFLOW_OUTPUT_ROOT` when set, otherwise `results`.
std::filesystem::path output_root();

Problem build_problem(const ExperimentConfig& config, std::uint64_t seed);

/// Runs one sampler on `problem`. With a non-empty `dir`, writes trace.csv, samples.csv and
/// summary.csv there. A sampler failure leaves the trace flushed up to the failing step and
/// is rethrown.
RunOutcome run_sampler(const ExperimentConfig& config, const Problem& problem, const std::string& sampler,
                       std::uint64_t seed, const std::filesystem::path& dir);

/// `config.sampler` once per seed, into `<root>/<output>/seed_<k>/`.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& config, const std::filesystem::path& root,
                                       std::ostream& log);

/// Every sampler in `config.samplers` once per seed, into `<root>/<output>/seed_<k>/<sampler>/`,
/// plus a merged `compare_summary.csv`. Budgets must agree across samplers.
std::vector<RunOutcome> compare_experiment(const ExperimentConfig& config, const std::filesystem::path& root,
                                           std::ostream& log);

/// One `grid_a<alpha>_b<beta>.csv` per configured (α, β) pair and a `right_mass.csv` with the
/// slice mass above `mass_threshold` and the number of local maxima per t.
void path_viz(const ExperimentConfig& config, const std::filesystem::path& root, std::ostream& log);

/// Four-mode target with centers e₁, −e₂, e₃, −e₄ and weights softmax(z), z ~ N(0, I₄)
/// drawn from the auxiliary stream of `seed`.
GaussianMixture<double> four_mode_target(Eigen::Index dimension, double mode_std, std::uint64_t seed);

/// Posterior mode by Newton's method.
VectorX<double> logistic_map(const LogisticRegressionTarget<double>& target, int max_iterations = 100);

/// Endpoint W₂ between forward-Euler transport with `steps` uniform steps under the oracle
/// field and the exact flow of the same p₀ draws.
double euler_endpoint_error(const ExperimentConfig& config, long steps, std::uint64_t seed);

void check_equal_budgets(const ExperimentConfig& config);

}  // namespace pathflow
