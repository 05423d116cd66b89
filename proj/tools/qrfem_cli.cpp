// SPDX-License-Identifier: Apache-2.0
// Batch experiment runner. Exit codes: 0 success, 2 config error, 3 numerical failure.
#include "qrfem/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-reversibility finite element experiments"};
  std::string config_path;
  std::string experiment_name;
  std::string out_dir = "out";
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--experiment", experiment_name,
                 "convergence, error_field, interior_rate, condition_sweep, infsup_sweep, "
                 "perturbation_sweep or parameter_coupling")
      ->required();
  app.add_option("--out", out_dir, "output directory for CSV files");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1U, 256U));
  app.add_option("--seed", seed, "noise seed, overrides the config");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  qrfem::ExperimentConfig config;
  qrfem::Experiment experiment{};
  try {
    experiment = qrfem::parse_experiment(experiment_name);
    config = qrfem::load_config(config_path);
    if (seed) config.seed = *seed;
    qrfem::check_config(config, experiment);
  } catch (const qrfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }

  qrfem::ExperimentResult result;
  try {
    result = qrfem::run_experiment(config, experiment, threads);
  } catch (const qrfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  }

  try {
    qrfem::write_outputs(result, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "cannot write outputs: " << e.what() << '\n';
    return exit_numerical;
  }
  for (const auto& line : result.summary) std::cout << line << '\n';
  for (const auto& file : result.files) std::cout << "wrote " << out_dir << '/' << file.name << '\n';
  if (!result.thresholds_met) std::cout << "some rate thresholds were not met\n";
  return 0;
}
