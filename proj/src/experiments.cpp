#include "pathflow/experiments.hpp"

#include "pathflow/csv_writer.hpp"
#include "pathflow/dataset.hpp"
#include "pathflow/metrics.hpp"
#include "pathflow/oracle.hpp"
#include "pathflow/rng.hpp"
#include "pathflow/samplers.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <optional>

namespace pathflow {

namespace {

using Particles = ParticleMatrix<double>;

constexpr long kReferenceDraws1d = 100000;

std::string run_id(const std::string& sampler, std::uint64_t seed) { return sampler + "-" + std::to_string(seed); }

std::filesystem::path seed_dir(const std::filesystem::path& base, std::uint64_t seed) {
  return base / ("seed_" + std::to_string(seed));
}

VectorX<double> first_coordinate(const Particles& x) { return x.col(0); }

Problem mixture_problem(const ExperimentConfig& config, std::uint64_t seed) {
  Problem p;
  auto mixture =
      std::make_shared<GaussianMixture<double>>(GaussianMixture<double>::isotropic(config.means, config.stds, config.weights));
  const Eigen::Index dim = mixture->dimension();
  p.initial = std::make_shared<InitialDistribution<double>>(VectorX<double>::Zero(dim), config.init_std);
  p.target = mixture;
  if (dim != 1) return p;

  if (config.experiment == "mode-seeking") {
    const double truth = score1<double>(mixture->sample(kReferenceDraws1d, stream_seed(seed, kTargetSampleStream, 0)).col(0));
    p.trace_metric_names = {"score1"};
    p.trace_metrics = [](const Particles& x) { return std::vector<double>{score1<double>(first_coordinate(x))}; };
    p.final_metrics = [truth](const Particles& x) {
      const double s = score1<double>(first_coordinate(x));
      return NamedValues{{"score1", s}, {"score1_true", truth}, {"score1_error", std::abs(s - truth)}};
    };
  } else if (config.experiment == "sensitivity") {
    const double truth = score2<double>(mixture->sample(kReferenceDraws1d, stream_seed(seed, kTargetSampleStream, 0)).col(0));
    p.trace_metric_names = {"score2"};
    p.trace_metrics = [](const Particles& x) { return std::vector<double>{score2<double>(first_coordinate(x))}; };
    p.final_metrics = [truth](const Particles& x) {
      return NamedValues{{"score2", score2<double>(first_coordinate(x))}, {"score2_true", truth}};
    };
  } else {
    p.trace_metric_names = {"score1", "score2"};
    p.trace_metrics = [](const Particles& x) {
      return std::vector<double>{score1<double>(first_coordinate(x)), score2<double>(first_coordinate(x))};
    };
  }
  return p;
}

Problem weight_recovery_problem(const ExperimentConfig& config, std::uint64_t seed) {
  Problem p;
  auto mixture = std::make_shared<GaussianMixture<double>>(four_mode_target(config.dimension, config.mode_std, seed));
  p.initial = std::make_shared<InitialDistribution<double>>(VectorX<double>::Zero(config.dimension), config.init_std);
  p.target = mixture;
  const ModeSpec<double> modes =
      mode_spec_from_mixture<double>(*mixture, config.radius, config.reference_draws, stream_seed(seed, kTargetSampleStream, 0));
  p.trace_metric_names = {"e"};
  p.trace_metrics = [modes](const Particles& x) { return std::vector<double>{weight_mismatch(x, modes)}; };
  p.final_metrics = [modes](const Particles& x) {
    NamedValues out{{"e", weight_mismatch(x, modes)}};
    const std::vector<double> est = estimated_weights(x, modes);
    for (std::size_t j = 0; j < est.size(); ++j) {
      out.emplace_back("w_hat" + std::to_string(j + 1), est[j]);
      out.emplace_back("w_true" + std::to_string(j + 1), modes.true_weights[j]);
    }
    return out;
  };
  return p;
}

Problem logistic_problem(const ExperimentConfig& config) {
  std::filesystem::path file = config.dataset;
  if (file.is_relative() && !config.base_dir.empty()) file = config.base_dir / file;
  const Dataset data = load_dataset_csv(file, config.standardize);
  if (data.features.rows() == 0) throw ConfigError("dataset: '" + file.string() + "' has no rows");
  if (config.train_rows >= data.features.rows()) throw ConfigError("train_rows: no rows left for testing");
  auto [train, test] = split_dataset(data, config.train_rows);

  Problem p;
  auto target = std::make_shared<LogisticRegressionTarget<double>>(train.features, train.labels, config.prior_std);
  p.initial = std::make_shared<InitialDistribution<double>>(VectorX<double>::Zero(target->dimension()), config.init_std);
  p.target = target;

  const VectorX<double> map = logistic_map(*target);
  MatrixX<double> map_probs = target->predict_proba(map, test.features);
  const CalibrationMetrics<double> map_metrics = calibration_metrics<double>(map_probs, test.labels);
  const MatrixX<double> inputs = test.features;
  const VectorX<double> labels = test.labels;
  p.final_metrics = [target, inputs, labels, map_metrics](const Particles& x) {
    MatrixX<double> probs(inputs.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) probs.col(i) = target->predict_proba(x.row(i).transpose(), inputs);
    const CalibrationMetrics<double> m = calibration_metrics<double>(probs, labels);
    return NamedValues{{"ece", m.ece},          {"acc", m.accuracy},         {"nll", m.nll},
                       {"map_ece", map_metrics.ece}, {"map_acc", map_metrics.accuracy}, {"map_nll", map_metrics.nll}};
  };
  return p;
}

Problem oracle_problem(const ExperimentConfig& config, std::uint64_t seed) {
  const GaussianPathOracle<double> oracle(config.sigma0, config.mu1, config.sigma1);
  Problem p;
  p.initial = oracle.initial();
  p.target = oracle.target();
  const VectorX<double> x0 = p.initial->sample(config.particles, seed).col(0);
  VectorX<double> exact(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) exact(i) = oracle.flow_map(x0(i), 1);
  p.trace_metric_names = {"mean", "std"};
  p.trace_metrics = [](const Particles& x) {
    const VectorX<double> v = x.col(0);
    const double m = v.mean();
    return std::vector<double>{m, std::sqrt((v.array() - m).square().mean())};
  };
  p.final_metrics = [oracle, exact](const Particles& x) {
    const VectorX<double> v = x.col(0);
    const double m = v.mean();
    const double s = std::sqrt((v.array() - m).square().mean());
    return NamedValues{{"mean", m},
                       {"std", s},
                       {"mean_error", std::abs(m - oracle.mu1())},
                       {"std_error", std::abs(s - oracle.sigma1())},
                       {"w2_exact", wasserstein_1d<double>(v, exact)}};
  };
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SummaryRow summary_row(const RunOutcome& r, const ExperimentConfig& config) {
  SummaryRow row{{"run", run_id(r.sampler, r.seed)},
                 {"experiment", config.experiment},
                 {"sampler", r.sampler},
                 {"seed", std::to_string(r.seed)},
                 {"particles", std::to_string(r.positions.rows())},
                 {"iterations", std::to_string(r.iterations)},
                 {"train_steps", std::to_string(r.train_steps)}};
  for (const auto& [k, v] : r.metrics) row.emplace_back(k, format_number(v));
  row.emplace_back("wall_seconds", format_number(r.wall_seconds));
  return row;
}

void log_outcome(std::ostream& log, const RunOutcome& r) {
  log << std::setw(8) << std::left << r.sampler << " seed " << r.seed << ":";
  for (const auto& [k, v] : r.metrics) log << ' ' << k << '=' << v;
  log << " (" << r.iterations << " iterations, " << std::setprecision(3) << r.wall_seconds << " s)" << std::setprecision(6)
      << '\n';
}

std::filesystem::path experiment_dir(const ExperimentConfig& config, const std::filesystem::path& root) {
  const std::filesystem::path out = config.output;
  return out.is_absolute() ? out : root / out;
}

void write_euler_trend(const ExperimentConfig& config, const std::filesystem::path& dir, std::ostream& log) {
  std::vector<SummaryRow> rows;
  log << "euler endpoint W2 (mean over seeds):";
  for (long steps : config.trend_steps) {
    double total = 0;
    for (std::uint64_t s : config.seeds()) {
      const double w = euler_endpoint_error(config, steps, s);
      total += w;
      rows.push_back({{"steps", std::to_string(steps)},
                      {"h", format_number(1.0 / static_cast<double>(steps))},
                      {"seed", std::to_string(s)},
                      {"w2", format_number(w)}});
    }
    log << " h=1/" << steps << ':' << total / static_cast<double>(config.num_seeds);
  }
  log << '\n';
  write_rows_csv(dir / "euler_trend.csv", rows);
}

}  // namespace

std::filesystem::path output_root() {
  const char* env = std::getenv("PATHFLOW_OUTPUT_ROOT");
  return (env != nullptr && *env != '\0') ? std::filesystem::path(env) : std::filesystem::path("results");
}

GaussianMixture<double> four_mode_target(Eigen::Index dimension, double mode_std, std::uint64_t seed) {
  internal::require(dimension >= 4, "four_mode_target: dimension must be at least 4");
  auto gen = particle_generator(seed, kAuxiliaryStream, 1);
  std::normal_distribution<double> normal;
  VectorX<double> z(4);
  for (Eigen::Index j = 0; j < 4; ++j) z(j) = normal(gen);
  const VectorX<double> w = (z.array() - z.maxCoeff()).exp().matrix();
  std::vector<double> weights(4);
  for (Eigen::Index j = 0; j < 4; ++j) weights[static_cast<std::size_t>(j)] = w(j) / w.sum();
  std::vector<VectorX<double>> centers(4, VectorX<double>::Zero(dimension));
  centers[0](0) = 1;
  centers[1](1) = -1;
  centers[2](2) = 1;
  centers[3](3) = -1;
  return GaussianMixture<double>::isotropic(centers, std::vector<double>(4, mode_std), weights);
}

VectorX<double> logistic_map(const LogisticRegressionTarget<double>& target, int max_iterations) {
  const Eigen::Index d = target.dimension();
  MatrixX<double> design(target.num_samples(), d);
  design << target.features(), VectorX<double>::Ones(target.num_samples());
  VectorX<double> x = VectorX<double>::Zero(d);
  const double prior_precision = 1 / (target.prior_std() * target.prior_std());
  for (int it = 0; it < max_iterations; ++it) {
    const VectorX<double> g = target.grad_log_unnorm(x);
    const VectorX<double> p = target.predict_proba(x, target.features());
    const VectorX<double> w = (p.array() * (1 - p.array())).matrix();
    MatrixX<double> hessian = design.transpose() * w.asDiagonal() * design;
    hessian.diagonal().array() += prior_precision;
    const VectorX<double> step = hessian.ldlt().solve(g);
    x += step;
    if (step.norm() < 1e-12 * (1 + x.norm())) break;
  }
  return x;
}

double euler_endpoint_error(const ExperimentConfig& config, long steps, std::uint64_t seed) {
  internal::require(steps >= 1, "euler_endpoint_error: need at least one step");
  const GaussianPathOracle<double> oracle(config.sigma0, config.mu1, config.sigma1);
  const VectorX<double> x0 = oracle.initial()->sample(config.trend_particles, seed).col(0);
  VectorX<double> x = x0;
  const double h = 1.0 / static_cast<double>(steps);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    x = x.unaryExpr([&](double v) { return v + h * oracle.field(v, t); });
  }
  const VectorX<double> exact = x0.unaryExpr([&](double v) { return oracle.flow_map(v, 1); });
  return wasserstein_1d<double>(x, exact);
}

Problem build_problem(const ExperimentConfig& config, std::uint64_t seed) {
  Problem p;
  if (config.target == "logistic") {
    p = logistic_problem(config);
  } else if (config.target == "oracle") {
    p = oracle_problem(config, seed);
  } else if (config.experiment == "weight-recovery") {
    p = weight_recovery_problem(config, seed);
  } else {
    p = mixture_problem(config, seed);
  }
  const double alpha = config.target == "oracle" ? 0.0 : config.pgps.alpha;
  const double beta = config.target == "oracle" ? 1.0 : config.pgps.beta;
  p.path = std::make_shared<LwsPath<double>>(p.initial, p.target, alpha, beta);
  if (!p.trace_metrics) p.trace_metrics = [](const Particles&) { return std::vector<double>{}; };
  if (!p.final_metrics) p.final_metrics = [](const Particles&) { return NamedValues{}; };
  return p;
}

RunOutcome run_sampler(const ExperimentConfig& config, const Problem& problem, const std::string& sampler,
                       std::uint64_t seed, const std::filesystem::path& dir) {
  const std::string id = run_id(sampler, seed);
  Particles x0 = problem.initial->sample(config.particles, seed);
  std::optional<TraceWriter> trace;
  if (!dir.empty()) trace.emplace(dir / "trace.csv", id, problem.trace_metric_names);
  TraceObserver<double> observer;
  if (trace) observer = [&](const TraceRow& row, const Particles& x) { trace->row(row, problem.trace_metrics(x)); };

  const long budget = config.budget_for(sampler);
  const auto start = std::chrono::steady_clock::now();
  ParticleEnsemble<double> ensemble;
  try {
    if (sampler == "pgps") {
      PgpsConfig<double> cfg = config.pgps;
      cfg.seed = seed;
      cfg.iteration_budget = budget;
      ensemble = pgps_run<double>(*problem.path, cfg, std::move(x0), observer);
    } else if (sampler == "tf-pgps") {
      PgpsConfig<double> cfg = config.pgps;
      cfg.seed = seed;
      if (cfg.adjust_steps < 1) throw ConfigError("adjust_steps: tf-pgps needs at least one adjustment step");
      if (budget > 0) cfg.tf_time_step = 1.0 / static_cast<double>(std::max<long>(1, budget / cfg.adjust_steps));
      ensemble = tf_pgps_run<double>(*problem.path, cfg, std::move(x0), observer);
    } else if (sampler == "ld") {
      LangevinConfig<double> cfg{config.step_size, budget, seed};
      ensemble = ld_run<double>(*problem.target, cfg, std::move(x0), observer);
    } else if (sampler == "svgd") {
      SvgdConfig<double> cfg{config.step_size, budget};
      ensemble = svgd_run<double>(*problem.target, cfg, std::move(x0), observer);
      ensemble.seed = seed;
    } else {
      throw ConfigError("sampler: unknown sampler '" + sampler + "'");
    }
  } catch (const std::exception& e) {
    if (trace) trace->footer(std::string("error: ") + e.what());
    throw;
  }

  RunOutcome out;
  out.sampler = sampler;
  out.seed = seed;
  out.iterations = ensemble.iterations;
  out.train_steps = ensemble.train_steps;
  out.wall_seconds = seconds_since(start);
  out.metrics = problem.final_metrics(ensemble.positions);
  out.positions = std::move(ensemble.positions);
  if (trace) trace->footer("wall_seconds=" + format_number(out.wall_seconds));
  if (!dir.empty()) {
    write_samples_csv(dir / "samples.csv", id, out.positions);
    write_rows_csv(dir / "summary.csv", {summary_row(out, config)});
  }
  return out;
}

std::vector<RunOutcome> run_experiment(const ExperimentConfig& config, const std::filesystem::path& root,
                                       std::ostream& log) {
  if (config.experiment == "path-viz") throw ConfigError("experiment: use the path-viz command for path-viz configs");
  const std::filesystem::path dir = experiment_dir(config, root);
  std::vector<RunOutcome> outcomes;
  std::vector<SummaryRow> rows;
  for (std::uint64_t s : config.seeds()) {
    const Problem problem = build_problem(config, s);
    outcomes.push_back(run_sampler(config, problem, config.sampler, s, seed_dir(dir, s)));
    log_outcome(log, outcomes.back());
    rows.push_back(summary_row(outcomes.back(), config));
  }
  write_rows_csv(dir / "summary.csv", rows);
  if (config.experiment == "oracle-convergence") write_euler_trend(config, dir, log);
  return outcomes;
}

void check_equal_budgets(const ExperimentConfig& config) {
  if (config.samplers.empty()) throw ConfigError("samplers: compare needs at least one sampler");
  const long reference = config.budget_for(config.samplers.front());
  for (const auto& s : config.samplers) {
    if (config.budget_for(s) != reference) {
      throw ConfigError("iterations." + s + ": compare requires equal budgets (" + std::to_string(config.budget_for(s)) +
                        " vs " + std::to_string(reference) + ")");
    }
  }
}

std::vector<RunOutcome> compare_experiment(const ExperimentConfig& config, const std::filesystem::path& root,
                                           std::ostream& log) {
  if (config.experiment == "path-viz") throw ConfigError("experiment: use the path-viz command for path-viz configs");
  check_equal_budgets(config);
  const std::filesystem::path dir = experiment_dir(config, root);
  std::vector<RunOutcome> outcomes;
  std::vector<SummaryRow> rows;
  for (std::uint64_t s : config.seeds()) {
    const Problem problem = build_problem(config, s);
    std::vector<RunOutcome> per_seed;
    for (const auto& sampler : config.samplers) {
      per_seed.push_back(run_sampler(config, problem, sampler, s, seed_dir(dir, s) / sampler));
      log_outcome(log, per_seed.back());
    }
    // Weight recovery reports the gap to Langevin dynamics on the same seed.
    const auto ld = std::find_if(per_seed.begin(), per_seed.end(), [](const RunOutcome& r) { return r.sampler == "ld"; });
    for (auto& r : per_seed) {
      SummaryRow row = summary_row(r, config);
      if (config.experiment == "weight-recovery" && ld != per_seed.end()) {
        row.insert(row.end() - 1, {"e_minus_e_ld", format_number(r.metrics.front().second - ld->metrics.front().second)});
      }
      rows.push_back(std::move(row));
      outcomes.push_back(std::move(r));
    }
  }
  write_rows_csv(dir / "compare_summary.csv", rows);
  if (config.experiment == "oracle-convergence") write_euler_trend(config, dir, log);
  return outcomes;
}

void path_viz(const ExperimentConfig& config, const std::filesystem::path& root, std::ostream& log) {
  if (config.path_pairs.empty()) throw ConfigError("pairs: at least one alpha,beta pair required");
  const Problem base = mixture_problem(config, config.seed);
  if (base.target->dimension() != 1) throw ConfigError("means: path-viz needs a 1D target");
  const std::filesystem::path dir = experiment_dir(config, root);
  std::vector<SummaryRow> mass_rows;
  for (const auto& [alpha, beta] : config.path_pairs) {
    const LwsPath<double> path(base.initial, base.target, alpha, beta);
    const PathGrid<double> grid = path_grid<double>(path, config.x_min, config.x_max, config.x_points, config.t_points);
    char name[64];
    std::snprintf(name, sizeof name, "grid_a%g_b%g.csv", alpha, beta);
    write_grid_csv(dir / name, grid.t, grid.x, grid.density);
    for (Eigen::Index i = 0; i < grid.t.size(); ++i) {
      double mass = 0;
      long maxima = 0;
      for (Eigen::Index j = 0; j < grid.x.size(); ++j) {
        if (grid.x(j) > config.mass_threshold) mass += grid.density(i, j);
        if (j > 0 && j + 1 < grid.x.size() && grid.density(i, j) > grid.density(i, j - 1) &&
            grid.density(i, j) > grid.density(i, j + 1)) {
          ++maxima;
        }
      }
      mass_rows.push_back({{"alpha", format_number(alpha)},
                           {"beta", format_number(beta)},
                           {"t", format_number(grid.t(i))},
                           {"right_mass", format_number(mass)},
                           {"local_maxima", std::to_string(maxima)}});
    }
    log << "wrote " << (dir / name).string() << '\n';
  }
  write_rows_csv(dir / "right_mass.csv", mass_rows);
}

}  // namespace pathflow
