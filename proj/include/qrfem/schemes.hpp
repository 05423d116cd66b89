// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qrfem/assembly.hpp"
#include "qrfem/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace qrfem {

enum class Problem { UniqueContinuation, Cauchy };
enum class Variant { Regularized, L2Stabilized, Unregularized };

[[nodiscard]] std::string to_string(Problem p);
[[nodiscard]] std::string to_string(Variant v);

struct NoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 0;
};

/// Measured data. q lives on omega cells, f on all cells (both receive the
/// cell index), phi on Gamma0 facets (receives the facet index).
struct ProblemData {
  EntityFunction q;
  EntityFunction f;
  EntityFunction phi;
};

struct SchemeConfig {
  Problem problem = Problem::Cauchy;
  Variant variant = Variant::Regularized;
  int primal_degree = 1;
  ElementType dual = ElementType::lagrange(2);
  double epsilon = 1e-4;
  double gamma = 0.5;
  ProblemData data;
  std::optional<NoiseSpec> noise;
};

/// Throws std::invalid_argument when the config is not one of the catalogued schemes.
void validate(const SchemeConfig& config);

/// Constraints implied by the problem type.
[[nodiscard]] Constraint primal_constraint(Problem problem);
[[nodiscard]] Constraint dual_constraint(Problem problem, ElementType dual);

/// An assembled scheme together with the spaces it was built on.
struct DiscreteSystem {
  SchemeConfig config;
  SpacePtr primal;
  SpacePtr dual;
  BlockSystem blocks;
};

struct Solution {
  FeFunction u;
  FeFunction lambda;
  double relative_residual = 0.0;
};

/// Assembles the saddle-point system of `config` on a tagged mesh. Noise in
/// config.noise is applied to the data first.
[[nodiscard]] DiscreteSystem build_system(const SchemeConfig& config,
                                          std::shared_ptr<const TriangleMesh> mesh);

[[nodiscard]] Solution solve(const DiscreteSystem& system);

/// Gram matrix of the triple norm on the product space (primal, dual).
[[nodiscard]] SparseMatrix triple_norm_gram(const DiscreteSystem& system);

enum class CouplingRule { Standard, L2Stabilized };

/// h = eps^{1/(2s-2)} (standard) or h = eps^{1/(2s)} (L2-stabilized).
[[nodiscard]] double couple_parameters(double s, double epsilon, CouplingRule rule);

/// Structured mesh size n whose triangle diameter sqrt(2)/n is closest to h.
[[nodiscard]] std::size_t snap_mesh_size(double h);

/// Piecewise-constant noise value in [-1, 1] of one entity.
[[nodiscard]] double noise_value(std::uint64_t seed, Index entity);

/// Adds amplitude * noise to q, f and phi (independent streams per datum);
/// the returned config has no pending noise. Amplitude 0 leaves the data untouched.
[[nodiscard]] SchemeConfig perturb_data(const SchemeConfig& config);

/// Harmonic Hadamard solution u = n^-2 sin(n x) sinh(n y) with its Cauchy data on
/// Gamma0 = {x = 0} U {y = 0}.
struct HadamardProblem {
  int n = 1;

  [[nodiscard]] double value(const Point& p) const;
  [[nodiscard]] Point gradient(const Point& p) const;
  /// Outward normal derivative on Gamma0 (x = 0 or y = 0).
  [[nodiscard]] double neumann(const Point& p) const;
  [[nodiscard]] ProblemData data() const;
};

}  // namespace qrfem
