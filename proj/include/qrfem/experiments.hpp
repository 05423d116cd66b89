// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qrfem/analysis.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrfem {

/// Bad or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Experiment {
  Convergence,
  ErrorField,
  InteriorRate,
  ConditionSweep,
  InfsupSweep,
  PerturbationSweep,
  ParameterCoupling,
};

[[nodiscard]] Experiment parse_experiment(const std::string& name);
[[nodiscard]] std::string to_string(Experiment e);

inline constexpr std::size_t max_solve_mesh = 128;
inline constexpr std::size_t max_eigen_mesh = 32;

struct ExperimentConfig {
  Problem problem = Problem::Cauchy;
  Variant variant = Variant::Regularized;
  int primal_degree = 1;
  Family dual_family = Family::Lagrange;
  std::vector<int> dual_degrees{1, 2};
  double epsilon = 1e-4;
  std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
  double gamma = 0.5;
  std::vector<int> oscillations{1, 5};
  std::vector<std::size_t> meshes{8, 16, 32, 64, 128};
  std::set<Side> gamma0{Side::Left, Side::Bottom};
  Box omega{0.0, 0.5, 0.0, 0.5};
  Box g_region{0.0, 0.8, 0.0, 0.5};
  std::size_t field_mesh = 128;
  std::size_t perturbation_mesh = 32;
  std::vector<double> deltas{0.0, 1e-4, 1e-3, 1e-2};
  std::uint64_t seed = 1;
  double regularity = 2.0;
  CouplingRule coupling = CouplingRule::Standard;
  /// Lower bound on fitted rates checked by the console summary.
  std::optional<double> min_rate;
};

/// Reads the JSON config format documented in the README. Missing keys keep
/// their defaults. Throws ConfigError.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks caps and tag requirements for one experiment. Throws ConfigError.
void check_config(const ExperimentConfig& config, Experiment experiment);

struct CsvFile {
  std::string name;
  std::string header;
  std::vector<std::string> rows;
};

struct ExperimentResult {
  std::vector<CsvFile> files;
  std::vector<std::string> summary;
  bool thresholds_met = true;
};

/// Mesh of size n x n with the config's Gamma0, omega and G tags.
[[nodiscard]] std::shared_ptr<const TriangleMesh> tagged_mesh(const ExperimentConfig& config,
                                                              std::size_t n);

/// Scheme on the Hadamard data of oscillation n with dual degree m.
[[nodiscard]] SchemeConfig scheme_for(const ExperimentConfig& config, int m, int n);

/// Runs independent jobs on up to `threads` workers; results are kept in job order.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config,
                                              Experiment experiment, unsigned threads = 1);

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace qrfem
