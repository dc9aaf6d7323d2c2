#include "pathflow/config.hpp"
#include "pathflow/experiments.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace pathflow;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pathflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmall = R"(
means = 0; 4
stds = 1, 0.5
weights = 0.4, 0.6
init_std = 2
alpha = 1
beta = 0.8
particles = 16
iterations = 40
adjust_steps = 3
max_train_steps = 5
hidden = 8
tf_time_step = 0.1
samplers = pgps, tf-pgps, ld, svgd
)";

int run_cli(const std::string& args, const std::string& env = "") {
  const int status = std::system((env + " " + PATHFLOW_CLI + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsAndComments) {
  const ExperimentConfig c = parse("means = 0\nstds = 1\nweights = 1\nparticles = 12  # trailing\n# whole line\n\nseed = 3\n");
  EXPECT_EQ(c.particles, 12);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.pgps.seed, 3u);
  EXPECT_EQ(c.name, "custom");
  EXPECT_EQ(c.output, "custom");
}

TEST(Config, UnknownKeyIsNamed) {
  EXPECT_EQ(config_error("bета = 1\n"), "bета: unknown key");
  EXPECT_EQ(config_error("iterations.hmc = 10\n"), "iterations.hmc: unknown key");
}

TEST(Config, MalformedLinesAndDuplicates) {
  EXPECT_NE(config_error("particles 12\n").find("line 1"), std::string::npos);
  EXPECT_NE(config_error("seed = 1\nseed = 2\n").find("seed: duplicate key"), std::string::npos);
  EXPECT_NE(config_error("particles = many\n").find("particles"), std::string::npos);
  EXPECT_NE(config_error(std::string(kSmall) + "beta = 0\n").find("beta"), std::string::npos);
  EXPECT_NE(config_error("experiment = nonsense\n").find("experiment"), std::string::npos);
  EXPECT_NE(config_error("sampler = hmc\n").find("sampler"), std::string::npos);
}

TEST(Config, PresetsThenOverrides) {
  const ExperimentConfig m = parse("experiment = mode-seeking\n");
  EXPECT_EQ(m.means.size(), 2u);
  EXPECT_EQ(m.pgps.alpha, 1);
  EXPECT_EQ(m.pgps.beta, 0.8);
  EXPECT_EQ(m.num_seeds, 5);
  // The experiment key wins regardless of where it appears.
  const ExperimentConfig s = parse("psi = 0.5\nexperiment = sensitivity\n");
  EXPECT_EQ(s.pgps.psi, 0.5);
  EXPECT_EQ(s.weights, (std::vector<double>{0.001, 0.999}));
  EXPECT_EQ(parse("experiment = weight-recovery\n").dimension, 8);
  EXPECT_EQ(parse("experiment = oracle-convergence\n").target, "oracle");
}

TEST(Config, PerSamplerBudgets) {
  const ExperimentConfig c = parse(std::string(kSmall) + "iterations.ld = 80\n");
  EXPECT_EQ(c.budget_for("ld"), 80);
  EXPECT_EQ(c.budget_for("svgd"), 40);
  EXPECT_THROW(check_equal_budgets(c), ConfigError);
  EXPECT_NO_THROW(check_equal_budgets(parse(kSmall)));
}

TEST(Config, LoadResolvesRelativeDataset) {
  const ExperimentConfig c = load_config(fs::path(PATHFLOW_SOURCE_DIR) / "configs" / "logistic_regression.cfg");
  EXPECT_EQ(c.base_dir, fs::path(PATHFLOW_SOURCE_DIR) / "configs");
  EXPECT_NO_THROW(build_problem(c, 0));
  EXPECT_THROW(load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST(Experiments, CompareWritesSchemasAndIsDeterministic) {
  const ExperimentConfig c = parse(std::string(kSmall) + "output = small\n");
  std::ostringstream log;
  const fs::path a = fresh_dir("cmp_a");
  const fs::path b = fresh_dir("cmp_b");
  const auto outcomes = compare_experiment(c, a, log);
  compare_experiment(c, b, log);
  ASSERT_EQ(outcomes.size(), 4u);
  for (const auto& s : c.samplers) {
    const fs::path dir = fs::path("small") / "seed_0" / s;
    const auto rows = lines(a / dir / "samples.csv");
    ASSERT_EQ(rows.size(), 17u) << s;
    EXPECT_EQ(rows[0], "run,particle,x0") << s;
    EXPECT_EQ(slurp(a / dir / "samples.csv"), slurp(b / dir / "samples.csv")) << s;
    const auto trace = lines(a / dir / "trace.csv");
    EXPECT_EQ(trace[0], "run,iter,t,dt,loss,train_steps,score1,score2") << s;
  }
  for (const auto& r : outcomes) EXPECT_LE(r.iterations, 40) << r.sampler;
  EXPECT_TRUE(fs::exists(a / "small" / "compare_summary.csv"));
}

TEST(Experiments, SmokeRunHasOneRowPerParticle) {
  const ExperimentConfig c = load_config(fs::path(PATHFLOW_SOURCE_DIR) / "configs" / "smoke.cfg");
  std::ostringstream log;
  const fs::path root = fresh_dir("smoke");
  run_experiment(c, root, log);
  EXPECT_EQ(lines(root / c.output / "seed_0" / "samples.csv").size(), static_cast<std::size_t>(c.particles) + 1);
  EXPECT_EQ(lines(root / c.output / "summary.csv").size(), 2u);
}

TEST(Experiments, PathVizSchemas) {
  ExperimentConfig c = load_config(fs::path(PATHFLOW_SOURCE_DIR) / "configs" / "path_viz.cfg");
  c.x_points = 91;
  c.t_points = 6;
  std::ostringstream log;
  const fs::path root = fresh_dir("viz");
  path_viz(c, root, log);
  const auto grid = lines(root / c.output / "grid_a1_b0.5.csv");
  ASSERT_EQ(grid.size(), 1u + 91 * 6);
  EXPECT_EQ(grid[0], "t,x,density");
  const auto mass = lines(root / c.output / "right_mass.csv");
  EXPECT_EQ(mass[0], "alpha,beta,t,right_mass,local_maxima");
  EXPECT_EQ(mass.size(), 1u + 3 * 6);
}

TEST(Cli, ExitCodesAndOutputRoot) {
  const fs::path root = fresh_dir("cli");
  const fs::path bad = root / "bad.cfg";
  std::ofstream(bad) << "bета = 1\n";
  EXPECT_EQ(run_cli("run " + bad.string()), 2);
  EXPECT_EQ(run_cli("check --instances 5"), 0);
  EXPECT_EQ(run_cli("check --instances 5 --inject-gradient-fault"), 1);
  EXPECT_NE(run_cli("frobnicate"), 0);
  const std::string smoke = (fs::path(PATHFLOW_SOURCE_DIR) / "configs" / "smoke.cfg").string();
  EXPECT_EQ(run_cli("run " + smoke, "PATHFLOW_OUTPUT_ROOT=" + root.string()), 0);
  EXPECT_TRUE(fs::exists(root / "smoke" / "seed_0" / "samples.csv"));
}
