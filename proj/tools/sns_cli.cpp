#include "sns/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  CLI::App app{"Coupling and log-Harnack verification for stochastic Navier-Stokes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 0;
  app.add_option("--config", config_path, "JSON config file (defaults when omitted)")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed, overrides the config");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);

  for (const char* name : {"verify-identities", "verify-moments", "verify-mlh", "asf-probe", "simulate"}) {
    app.add_subcommand(name);
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const auto command = sns::parse_command(name);

  sns::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = sns::load_config(config_path);
    if (seed_opt->count() > 0) config.seed = seed;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return sns::exit_runtime;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    const int code = sns::execute_command(*command, config, out_dir);
    std::cout << name << ": exit " << code << " (" << out_dir << "/report.json)\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return sns::exit_runtime;
  }
}
