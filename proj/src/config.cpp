#include "pathflow/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pathflow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(s);
  while (std::getline(stream, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& value) {
  if (value == "inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) bad_value(key, value, "a number");
  return v;
}

long to_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE) bad_value(key, value, "an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true or false");
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) out.push_back(to_double(key, item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <typename Field>
Setter number(Field ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_integral_v<Field>) {
      c.*member = static_cast<Field>(to_long(k, v));
    } else {
      c.*member = to_double(k, v);
    }
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.name = v; }},
      {"output", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output = v; }},
      {"sampler", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.sampler = v; }},
      {"samplers", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.samplers = split(v, ','); }},
      {"particles", number(&ExperimentConfig::particles)},
      {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const long s = to_long(k, v);
         if (s < 0) bad_value(k, v, "a nonnegative integer");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"seeds", number(&ExperimentConfig::num_seeds)},
      {"iterations", number(&ExperimentConfig::iterations)},
      {"target", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.target = v; }},
      {"means", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.means.clear();
         for (const auto& comp : split(v, ';')) {
           const std::vector<double> coords = to_doubles(k, comp);
           c.means.push_back(Eigen::Map<const VectorX<double>>(coords.data(), static_cast<Eigen::Index>(coords.size())));
         }
       }},
      {"stds", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.stds = to_doubles(k, v); }},
      {"weights", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.weights = to_doubles(k, v); }},
      {"init_std", number(&ExperimentConfig::init_std)},
      {"dataset", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.dataset = v; }},
      {"standardize", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.standardize = to_bool(k, v); }},
      {"prior_std", number(&ExperimentConfig::prior_std)},
      {"train_rows", number(&ExperimentConfig::train_rows)},
      {"sigma0", number(&ExperimentConfig::sigma0)},
      {"mu1", number(&ExperimentConfig::mu1)},
      {"sigma1", number(&ExperimentConfig::sigma1)},
      {"trend_steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.trend_steps.clear();
         for (const auto& item : split(v, ',')) c.trend_steps.push_back(to_long(k, item));
       }},
      {"trend_particles", number(&ExperimentConfig::trend_particles)},
      {"dimension", number(&ExperimentConfig::dimension)},
      {"mode_std", number(&ExperimentConfig::mode_std)},
      {"radius", number(&ExperimentConfig::radius)},
      {"reference_draws", number(&ExperimentConfig::reference_draws)},
      {"alpha", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pgps.alpha = to_double(k, v); }},
      {"beta", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pgps.beta = to_double(k, v); }},
      {"psi", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pgps.psi = to_double(k, v); }},
      {"dt_max", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pgps.dt_max = to_double(k, v); }},
      {"eta", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.train.learning_rate = to_double(k, v);
       }},
      {"max_train_steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.train.max_steps = to_long(k, v);
       }},
      {"epsilon", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.train.threshold = to_double(k, v);
       }},
      {"momentum", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.train.momentum = to_double(k, v);
       }},
      {"optimizer", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "adam") {
           c.pgps.train.optimizer = Optimizer::kAdam;
         } else if (v == "gd") {
           c.pgps.train.optimizer = Optimizer::kGradientDescent;
         } else {
           bad_value(k, v, "adam or gd");
         }
       }},
      {"hidden", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pgps.hidden = to_long(k, v); }},
      {"init_scale", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.init_scale = to_double(k, v);
       }},
      {"adjust_steps", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.adjust_steps = to_long(k, v);
       }},
      {"adjust_delta", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.adjust_delta = to_double(k, v);
       }},
      {"tf_time_step", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.pgps.tf_time_step = to_double(k, v);
       }},
      {"step_size", number(&ExperimentConfig::step_size)},
      {"pairs", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.path_pairs.clear();
         for (const auto& item : split(v, ';')) {
           const std::vector<double> ab = to_doubles(k, item);
           if (ab.size() != 2) bad_value(k, item, "alpha,beta");
           c.path_pairs.emplace_back(ab[0], ab[1]);
         }
       }},
      {"x_min", number(&ExperimentConfig::x_min)},
      {"x_max", number(&ExperimentConfig::x_max)},
      {"x_points", number(&ExperimentConfig::x_points)},
      {"t_points", number(&ExperimentConfig::t_points)},
      {"mass_threshold", number(&ExperimentConfig::mass_threshold)},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"custom",          "mode-seeking",        "sensitivity",
                                                 "weight-recovery", "logistic-regression", "oracle-convergence",
                                                 "path-viz"};
  return names;
}

bool is_known_sampler(const std::string& name) {
  return name == "pgps" || name == "tf-pgps" || name == "ld" || name == "svgd";
}

void apply_preset(ExperimentConfig& c, const std::string& experiment) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    throw ConfigError("experiment: unknown experiment '" + experiment + "'");
  }
  c.experiment = experiment;
  c.pgps.train.optimizer = Optimizer::kAdam;
  c.pgps.train.learning_rate = 1e-2;
  c.pgps.train.max_steps = 300;
  auto one_d = [](double v) { return VectorX<double>::Constant(1, v); };

  if (experiment == "mode-seeking") {
    c.means = {one_d(0), one_d(8)};
    c.stds = {1, 1};
    c.weights = {0.5, 0.5};
    c.init_std = 3;
    c.pgps.alpha = 1;
    c.pgps.beta = 0.8;
    c.pgps.psi = 0.1;
    c.pgps.adjust_steps = 10;
    c.num_seeds = 5;
    c.samplers = {"pgps", "tf-pgps", "ld", "svgd"};
  } else if (experiment == "sensitivity") {
    c.means = {one_d(-5), one_d(5)};
    c.stds = {1, 1};
    c.weights = {0.001, 0.999};
    c.init_std = 2;
    c.pgps.alpha = 0;
    c.pgps.beta = 1;
    c.pgps.psi = 0.01;
    c.pgps.adjust_steps = 0;
    c.num_seeds = 5;
    c.samplers = {"pgps", "ld", "svgd"};
  } else if (experiment == "weight-recovery") {
    c.dimension = 8;
    c.init_std = 1;
    c.pgps.hidden = 128;
    c.pgps.alpha = 1;
    c.pgps.beta = 0.8;
    c.pgps.psi = 0.1;
    c.pgps.adjust_steps = 0;
    c.pgps.adjust_delta = 1e-4;
    c.pgps.train.max_steps = 100;
    c.step_size = 1e-4;
    c.num_seeds = 10;
    c.samplers = {"pgps", "ld"};
  } else if (experiment == "logistic-regression") {
    c.target = "logistic";
    c.particles = 10;
    c.init_std = 1;
    c.pgps.hidden = 128;
    c.pgps.alpha = 0;
    c.pgps.beta = 1;
    c.pgps.psi = 0.1;
    c.pgps.adjust_steps = 10;
    c.pgps.adjust_delta = 1e-1;
    c.step_size = 1e-1;
    c.iterations = 500;
    c.num_seeds = 5;
    c.samplers = {"pgps", "ld", "svgd"};
  } else if (experiment == "oracle-convergence") {
    c.target = "oracle";
    c.particles = 512;
    c.pgps.alpha = 0;
    c.pgps.beta = 1;
    c.pgps.psi = 0.05;
    c.pgps.adjust_steps = 0;
    c.num_seeds = 5;
    c.samplers = {"pgps", "tf-pgps"};
  } else if (experiment == "path-viz") {
    c.means = {one_d(0), one_d(8)};
    c.stds = {1, 1};
    c.weights = {0.5, 0.5};
    c.init_std = 1.5;
    c.path_pairs = {{0, 1}, {1, 0.5}, {0.2, 0.5}};
  } else {
    c.pgps.train.optimizer = Optimizer::kGradientDescent;
    c.pgps.train.learning_rate = 1e-3;
    c.pgps.train.max_steps = 100;
  }
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (long k = 0; k < num_seeds; ++k) out.push_back(seed + static_cast<std::uint64_t>(k));
  return out;
}

long ExperimentConfig::budget_for(const std::string& sampler_name) const {
  const auto it = sampler_iterations.find(sampler_name);
  return it == sampler_iterations.end() ? iterations : it->second;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
  if (!is_known_sampler(sampler)) fail("sampler", "unknown sampler '" + sampler + "'");
  for (const auto& s : samplers) {
    if (!is_known_sampler(s)) fail("samplers", "unknown sampler '" + s + "'");
  }
  for (const auto& [s, n] : sampler_iterations) {
    if (!is_known_sampler(s)) fail("iterations." + s, "unknown sampler");
    if (n < 0) fail("iterations." + s, "must be nonnegative");
  }
  if (particles < 1) fail("particles", "must be at least 1");
  if (num_seeds < 1) fail("seeds", "must be at least 1");
  if (iterations < 0) fail("iterations", "must be nonnegative");
  if (target != "mixture" && target != "logistic" && target != "oracle") {
    fail("target", "expected mixture, logistic or oracle");
  }
  if (target == "mixture" && experiment != "weight-recovery") {
    if (means.empty()) fail("means", "at least one component required");
    if (stds.size() != means.size()) fail("stds", "one value per component required");
    if (weights.size() != means.size()) fail("weights", "one value per component required");
    for (const auto& m : means) {
      if (m.size() != means.front().size()) fail("means", "components differ in dimension");
    }
    for (double s : stds) {
      if (!(s > 0)) fail("stds", "must be positive");
    }
    double total = 0;
    for (double w : weights) {
      if (!(w >= 0)) fail("weights", "must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1) > 1e-12) fail("weights", "must sum to 1");
  }
  if (!(init_std > 0)) fail("init_std", "must be positive");
  if (target == "logistic") {
    if (dataset.empty()) fail("dataset", "required for the logistic target");
    if (!(prior_std > 0)) fail("prior_std", "must be positive");
    if (train_rows < 1) fail("train_rows", "must be at least 1");
  }
  if (!(sigma0 > 0)) fail("sigma0", "must be positive");
  if (!(sigma1 > 0)) fail("sigma1", "must be positive");
  for (long n : trend_steps) {
    if (n < 1) fail("trend_steps", "step counts must be positive");
  }
  if (trend_particles < 1) fail("trend_particles", "must be at least 1");
  if (dimension < 4) fail("dimension", "the four-mode target needs at least 4 dimensions");
  if (!(mode_std > 0)) fail("mode_std", "must be positive");
  if (!(radius > 0)) fail("radius", "must be positive");
  if (reference_draws < 1) fail("reference_draws", "must be at least 1");
  if (!(step_size > 0)) fail("step_size", "must be positive");
  if (!(x_max > x_min)) fail("x_max", "must exceed x_min");
  if (x_points < 2) fail("x_points", "must be at least 2");
  if (t_points < 2) fail("t_points", "must be at least 2");
  for (const auto& [a, b] : path_pairs) {
    if (!(a >= 0 && a <= 1)) fail("pairs", "alpha must lie in [0, 1]");
    if (!(b > 0 && b <= 1)) fail("pairs", "beta must lie in (0, 1]");
  }
  PgpsConfig<double> check = pgps;
  check.iteration_budget = budget_for("pgps");
  check.validate();
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::string line;
  long line_no = 0;
  std::string experiment = "custom";
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing key");
    if (!seen.insert(key).second) throw ConfigError(key + ": duplicate key");
    if (key == "experiment") {
      experiment = value;
    } else {
      entries.emplace_back(key, value);
    }
  }

  ExperimentConfig config;
  apply_preset(config, experiment);
  config.base_dir = base_dir;
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    if (key.rfind("iterations.", 0) == 0) {
      const std::string which = key.substr(std::string("iterations.").size());
      if (!is_known_sampler(which)) throw ConfigError(key + ": unknown key");
      config.sampler_iterations[which] = to_long(key, value);
      continue;
    }
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key + ": unknown key");
    it->second(config, key, value);
  }
  if (config.name.empty()) config.name = config.experiment;
  if (config.output.empty()) config.output = config.name;
  config.pgps.seed = config.seed;
  config.pgps.iteration_budget = config.budget_for("pgps");
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

}  // namespace pathflow
