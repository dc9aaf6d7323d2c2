#pragma once

#include "pathflow/samplers.hpp"
#include "pathflow/types.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pathflow {

/// Everything a `run`, `compare` or `path-viz` invocation needs. Built from a flat
/// `key = value` file; see README for the key reference.
struct ExperimentConfig {
  std::string experiment = "custom";
  std::string name;
  std::string sampler = "pgps";
  std::vector<std::string> samplers;
  std::map<std::string, long> sampler_iterations;  // iterations.<sampler> overrides

  long particles = 500;
  std::uint64_t seed = 0;
  long num_seeds = 1;
  long iterations = 1000;

  // target = mixture | logistic | oracle
  std::string target = "mixture";
  std::vector<VectorX<double>> means;
  std::vector<double> stds;
  std::vector<double> weights;
  double init_std = 1;

  std::string dataset;
  bool standardize = true;
  double prior_std = 1;
  long train_rows = 150;

  double sigma0 = 1.5;
  double mu1 = 2;
  double sigma1 = 0.5;
  std::vector<long> trend_steps = {8, 16, 32, 64};
  long trend_particles = 2000;

  long dimension = 8;
  double mode_std = 0.15;
  double radius = 1;
  long reference_draws = 100000;

  PgpsConfig<double> pgps;
  double step_size = 1e-2;

  std::vector<std::pair<double, double>> path_pairs;
  double x_min = -6;
  double x_max = 12;
  long x_points = 361;
  long t_points = 51;
  double mass_threshold = 4;

  std::string output;
  std::filesystem::path base_dir;

  std::vector<std::uint64_t> seeds() const;
  long budget_for(const std::string& sampler_name) const;
  void validate() const;
};

/// Sets the defaults of a named experiment. Unknown names raise ConfigError.
void apply_preset(ExperimentConfig& config, const std::string& experiment);

/// Parses `key = value` lines with `#` comments. The `experiment` key, wherever it appears,
/// selects the preset before any other key is applied. Unknown keys raise ConfigError
/// naming the key.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

bool is_known_sampler(const std::string& name);
const std::vector<std::string>& experiment_names();

}  // namespace pathflow
