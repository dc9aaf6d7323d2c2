#include "pathflow/config.hpp"
#include "pathflow/experiments.hpp"
#include "pathflow/verification.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kConfigExit = 2;
constexpr int kSamplerExit = 3;

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const pathflow::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const pathflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const pathflow::SamplerError& e) {
    std::cerr << "sampler error: " << e.what() << '\n';
    return kSamplerExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-guided particle sampling experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the configured sampler once per seed");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  auto* compare = app.add_subcommand("compare", "Run every configured sampler per seed under equal budgets");
  compare->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  auto* viz = app.add_subcommand("path-viz", "Write density grids of the configured paths");
  viz->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  bool inject_fault = false;
  long instances = 100;
  auto* check = app.add_subcommand("check", "Run the derivative and oracle verification battery");
  check->add_option("--instances", instances, "Randomized instances per check")->check(CLI::PositiveNumber);
  check->add_flag("--inject-gradient-fault", inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (check->parsed()) {
    pathflow::VerificationOptions options;
    options.instances = instances;
    options.inject_gradient_fault = inject_fault;
    const auto results = pathflow::run_verification(options);
    pathflow::print_verification_table(std::cout, results);
    return pathflow::all_passed(results) ? 0 : 1;
  }

  return guarded([&] {
    const pathflow::ExperimentConfig config = pathflow::load_config(config_path);
    const auto root = pathflow::output_root();
    if (run->parsed()) {
      pathflow::run_experiment(config, root, std::cout);
    } else if (compare->parsed()) {
      pathflow::compare_experiment(config, root, std::cout);
    } else {
      pathflow::path_viz(config, root, std::cout);
    }
    return 0;
  });
}
