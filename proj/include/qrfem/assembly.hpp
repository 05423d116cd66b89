// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qrfem/fe_space.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>

namespace qrfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Bilinear forms. Matrices are (test dimension) x (trial dimension).
enum class FormKind {
  BrokenStiffness,    // (grad_h u, grad_h v)
  L2Mass,             // (u, v)
  BrokenH1,           // L2Mass + BrokenStiffness
  ScaledBrokenH1,     // sum_K h_K^2 <u, v>_{H1(K)}
  OmegaMass,          // (u, v) on cells tagged OmegaData
  OmegaMassInvH2,     // sum_{K in omega} h_K^-2 (u, v)_K
  Gamma0Mass,         // <u, v> on Gamma0 facets
  JumpPenalty,        // sum_{interior F} h_F [grad u . n][grad v . n]
  NormalDerivGamma0,  // sum_{F in Gamma0} h_F (grad u . nu)(grad v . nu)
  NormalDerivBoundary,
  ElementLaplacian,   // sum_K h_K^2 (lap u, lap v)_K
  SStar,              // JumpPenalty + NormalDerivBoundary + ElementLaplacian
};

enum class RhsKind {
  InteriorData,       // (q, v)_omega
  InteriorDataInvH2,  // sum_{K in omega} h_K^-2 (q, v)_K
  Source,             // (f, w)
  NeumannGamma0,      // <phi, w>_Gamma0
};

/// Data that may depend on the mesh entity it is integrated over
/// (cell index for volume data, facet index for boundary data).
using EntityFunction = std::function<double(Index entity, const Point& x)>;

[[nodiscard]] EntityFunction pointwise(ScalarFunction f);

/// Throws std::invalid_argument for spaces on different meshes, OmegaMass with
/// no omega cells, or Gamma0 forms without Gamma0 facets.
[[nodiscard]] SparseMatrix assemble_form(FormKind kind, const FiniteElementSpace& trial,
                                         const FiniteElementSpace& test);

[[nodiscard]] Eigen::VectorXd assemble_rhs(RhsKind kind, const FiniteElementSpace& test,
                                           const EntityFunction& data);

/// <flux . nu, w> on Gamma0 facets, with nu the outward normal.
[[nodiscard]] Eigen::VectorXd assemble_neumann_flux(const FiniteElementSpace& test,
                                                    const VectorFunction& flux);

/// Functional w -> (grad_h u, grad_h w) over `test`.
[[nodiscard]] Eigen::VectorXd apply_stiffness(const FeFunction& u, const FiniteElementSpace& test);

/// Element-wise Laplacian of u; zero for P1 and CR1.
using BrokenField = std::function<double(Index cell, const Eigen::Vector3d& bary)>;
[[nodiscard]] BrokenField broken_laplacian(const FeFunction& u);

/// Coordinate text format: "rows cols nnz" then one "row col value" line per entry.
void write_matrix(std::ostream& out, const SparseMatrix& matrix);

}  // namespace qrfem
