#include "pathflow/verification.hpp"

#include "pathflow/experiments.hpp"
#include "pathflow/oracle.hpp"
#include "pathflow/path.hpp"
#include "pathflow/targets.hpp"
#include "pathflow/vector_field.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

namespace pathflow {

namespace {

using Vec = VectorX<double>;
constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-5;

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen_); }
  Vec normal(Eigen::Index n, double scale) {
    std::normal_distribution<double> dist(0, scale);
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(gen_);
    return v;
  }
  std::uint64_t next() { return gen_(); }

  std::shared_ptr<GaussianMixture<double>> mixture(Eigen::Index dim) {
    const long k = integer(1, 3);
    std::vector<Vec> means;
    std::vector<double> stds;
    std::vector<double> weights;
    double total = 0;
    for (long j = 0; j < k; ++j) {
      means.push_back(normal(dim, 2));
      stds.push_back(uniform(0.5, 2));
      weights.push_back(uniform(0.1, 1));
      total += weights.back();
    }
    for (double& w : weights) w /= total;
    return std::make_shared<GaussianMixture<double>>(GaussianMixture<double>::isotropic(means, stds, weights));
  }

 private:
  std::mt19937_64 gen_;
};

// Analytic gradient of a target, doubled when the fault hook is active.
std::function<Vec(const Vec&)> target_gradient(const TargetDensity<double>& target, bool fault) {
  return [&target, fault](const Vec& x) {
    Vec g = target.grad_log_unnorm(x);
    return fault ? Vec(2 * g) : g;
  };
}

double fd_target(const TargetDensity<double>& target, const Vec& x, bool fault) {
  return fd_check<double>([&](const Vec& p) { return target.log_unnorm(p); }, target_gradient(target, fault), x,
                          kFdStep);
}

CheckResult timed(const std::string& name, long instances, double tolerance, const std::string& relation,
                  const std::function<double()>& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.name = name;
  r.instances = instances;
  r.tolerance = tolerance;
  r.relation = relation;
  r.value = body();
  if (relation == "<") {
    r.passed = r.value < tolerance;
  } else if (relation == ">") {
    r.passed = r.value > tolerance;
  } else {
    r.passed = r.value <= tolerance;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerificationOptions& options) {
  const long n = options.instances;
  const bool fault = options.inject_gradient_fault;
  std::vector<CheckResult> results;

  results.push_back(timed("mixture gradient", n, kFdTolerance, "<", [&] {
    Draws draws(options.seed + 1);
    double worst = 0;
    for (long i = 0; i < n; ++i) {
      const Eigen::Index d = draws.integer(1, 4);
      const auto gmm = draws.mixture(d);
      worst = std::max(worst, fd_target(*gmm, draws.normal(d, 3), fault));
    }
    return worst;
  }));

  results.push_back(timed("initial gradient", n, kFdTolerance, "<", [&] {
    Draws draws(options.seed + 2);
    double worst = 0;
    for (long i = 0; i < n; ++i) {
      const Eigen::Index d = draws.integer(1, 4);
      const InitialDistribution<double> p0(draws.normal(d, 1), draws.uniform(0.5, 3));
      worst = std::max(worst, fd_target(p0, draws.normal(d, 3), fault));
    }
    return worst;
  }));

  results.push_back(timed("logistic gradient", n, kFdTolerance, "<", [&] {
    Draws draws(options.seed + 3);
    double worst = 0;
    for (long i = 0; i < n; ++i) {
      MatrixX<double> features(20, 3);
      for (Eigen::Index r = 0; r < features.rows(); ++r) features.row(r) = draws.normal(3, 1).transpose();
      Vec labels(20);
      for (Eigen::Index r = 0; r < labels.size(); ++r) labels(r) = draws.uniform(0, 1) < 0.5 ? 0 : 1;
      const LogisticRegressionTarget<double> target(features, labels, draws.uniform(0.5, 2));
      worst = std::max(worst, fd_target(target, draws.normal(4, 1), fault));
    }
    return worst;
  }));

  results.push_back(timed("partition-free gradient", n, 0, "<=", [&] {
    Draws draws(options.seed + 4);
    double worst = 0;
    for (long i = 0; i < n; ++i) {
      const Eigen::Index d = draws.integer(1, 4);
      const auto gmm = draws.mixture(d);
      const ShiftedTarget<double> shifted(gmm, draws.uniform(-50, 50));
      const Vec x = draws.normal(d, 3);
      worst = std::max(worst, (shifted.grad_log_unnorm(x) - gmm->grad_log_unnorm(x)).cwiseAbs().maxCoeff());
    }
    return worst;
  }));

  // Shared random paths for the spatial gradient and the time derivative.
  struct PathCase {
    std::shared_ptr<LwsPath<double>> path;
    Vec x;
    double t;
  };
  auto path_cases = [&](std::uint64_t salt) {
    Draws draws(options.seed + salt);
    std::vector<PathCase> cases;
    for (long i = 0; i < n; ++i) {
      const Eigen::Index d = draws.integer(1, 4);
      auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(d), draws.uniform(0.5, 3));
      const double alpha = draws.uniform(0, 1);
      const double beta = draws.uniform(0.1, 1);
      cases.push_back({std::make_shared<LwsPath<double>>(p0, draws.mixture(d), alpha, beta), draws.normal(d, 2),
                       draws.uniform(0, 1)});
    }
    // The boundary times use one-sided stencils.
    cases[0].t = 0;
    cases[1].t = 1;
    return cases;
  };

  results.push_back(timed("path gradient", n, kFdTolerance, "<", [&] {
    double worst = 0;
    for (const auto& c : path_cases(5)) {
      worst = std::max(worst, fd_check<double>([&](const Vec& p) { return c.path->log_t(p, c.t); },
                                               [&](const Vec& p) { return c.path->grad_log_t(p, c.t); }, c.x, kFdStep));
    }
    return worst;
  }));

  results.push_back(timed("path time derivative", n, kFdTolerance, "<", [&] {
    double worst = 0;
    for (const auto& c : path_cases(6)) {
      const double analytic = c.path->dt_log_t(c.x, c.t);
      const double numeric =
          fd_derivative<double>([&](double s) { return c.path->log_t(c.x, s); }, c.t, kFdStep, 0, 1);
      worst = std::max(worst, std::abs(analytic - numeric) / (1 + std::abs(analytic)));
    }
    return worst;
  }));

  results.push_back(timed("field divergence", n, kFdTolerance, "<", [&] {
    Draws draws(options.seed + 7);
    double worst = 0;
    for (long i = 0; i < n; ++i) {
      const Eigen::Index d = draws.integer(1, 4);
      const auto field = MlpVectorField<double>::random_uniform(d, draws.integer(1, 8), 1.0, draws.next());
      const Vec x = draws.normal(d, 1.5);
      double numeric = 0;
      Vec probe = x;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double h = kFdStep * (1 + std::abs(x(k)));
        probe(k) = x(k) + h;
        const double up = field.evaluate(probe)(k);
        probe(k) = x(k) - h;
        const double down = field.evaluate(probe)(k);
        probe(k) = x(k);
        numeric += (up - down) / (2 * h);
      }
      const double analytic = field.divergence(x);
      worst = std::max(worst, std::abs(analytic - numeric) / (1 + std::abs(analytic)));
    }
    return worst;
  }));

  results.push_back(timed("loss gradient", n, kFdTolerance, "<", [&] {
    Draws draws(options.seed + 8);
    double worst = 0;
    for (long i = 0; i < n; ++i) {
      const Eigen::Index d = draws.integer(1, 4);
      auto p0 = std::make_shared<InitialDistribution<double>>(Vec::Zero(d), draws.uniform(0.5, 3));
      const LwsPath<double> path(p0, draws.mixture(d), draws.uniform(0, 1), draws.uniform(0.1, 1));
      ParticleMatrix<double> x(draws.integer(2, 8), d);
      for (Eigen::Index r = 0; r < x.rows(); ++r) x.row(r) = draws.normal(d, 1.5).transpose();
      const double t = draws.uniform(0, 1);
      const PathBatch<double> batch = evaluate_path<double>(path, x, t);
      const auto field = MlpVectorField<double>::random_uniform(d, draws.integer(1, 8), 0.5, draws.next());
      MlpVectorField<double> scratch = field;
      worst = std::max(worst, fd_check<double>(
                                  [&](const Vec& theta) {
                                    scratch.unflatten(theta);
                                    return loss<double>(scratch, x, batch);
                                  },
                                  [&](const Vec&) { return loss_and_gradient<double>(field, x, batch).gradient.flatten(); },
                                  field.flatten(), kFdStep));
    }
    return worst;
  }));

  const GaussianPathOracle<double> oracle(2.0, 3.0, 0.7);
  results.push_back(timed("oracle residual identity", 2500, 1e-8, "<", [&] {
    return residual_identity_check<double>(
        oracle, [&](double x, double t) { return oracle.field(x, t); },
        [&](double, double t) { return oracle.field_divergence(t); }, -5.0, 8.0, 50, 50);
  }));

  results.push_back(timed("perturbed field rejected", 2500, 0.05, ">", [&] {
    return residual_identity_check<double>(
        oracle, [&](double x, double t) { return oracle.field(x, t) + 0.1; },
        [&](double, double t) { return oracle.field_divergence(t); }, -5.0, 8.0, 50, 50);
  }));

  results.push_back(timed("euler step-size trend", 20, 0, "<=", [&] {
    ExperimentConfig config;
    config.sigma0 = 2.0;
    config.mu1 = 3.0;
    config.sigma1 = 0.7;
    const std::vector<long> steps = {8, 16, 32, 64};
    std::vector<double> mean(steps.size(), 0);
    for (std::uint64_t s = 0; s < 5; ++s) {
      for (std::size_t k = 0; k < steps.size(); ++k) mean[k] += euler_endpoint_error(config, steps[k], s) / 5;
    }
    // Largest increase between consecutive halvings; the trend holds iff this is ≤ 0.
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < mean.size(); ++k) worst = std::max(worst, mean[k] - mean[k - 1]);
    return worst;
  }));

  return results;
}

void print_verification_table(std::ostream& out, const std::vector<CheckResult>& results) {
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %9s %13s %4s %10s %8s %6s\n", "check", "instances", "value", "", "tolerance",
                "seconds", "result");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-26s %9ld %13.4e %4s %10.1e %8.3f %6s\n", r.name.c_str(), r.instances, r.value,
                  r.relation.c_str(), r.tolerance, r.seconds, r.passed ? "PASS" : "FAIL");
    out << line;
  }
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace pathflow
