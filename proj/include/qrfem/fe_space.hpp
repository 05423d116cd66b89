// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qrfem/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qrfem {

enum class Family { Lagrange, CrouzeixRaviart };

/// Which degrees of freedom are eliminated from the global numbering.
enum class Constraint {
  None,
  ZeroOnGamma0,         // V_0h: vanishes on closed Gamma0
  ZeroOnGamma1,         // V_1h: vanishes on closed Gamma1
  ZeroOnBoundary,       // W_h: vanishes on the whole boundary
  CRZeroMeanOffGamma0,  // CR_{1,Gamma0}: keeps interior and Gamma0 facet dofs
  CRZeroMeanAll,        // CR_{1,0}: keeps interior facet dofs
};

struct ElementType {
  Family family = Family::Lagrange;
  int degree = 1;

  static constexpr ElementType lagrange(int k) { return {Family::Lagrange, k}; }
  static constexpr ElementType crouzeix_raviart() { return {Family::CrouzeixRaviart, 1}; }
  friend bool operator==(const ElementType&, const ElementType&) = default;
};

[[nodiscard]] std::string to_string(ElementType type);
[[nodiscard]] std::string to_string(Constraint constraint);

/// Local shape functions on the reference triangle, as functions of the
/// barycentric coordinates.
class ReferenceElement {
 public:
  explicit ReferenceElement(ElementType type);

  [[nodiscard]] ElementType type() const noexcept { return type_; }
  [[nodiscard]] int num_dofs() const noexcept { return static_cast<int>(nodes_.size()); }
  /// Barycentric coordinates of each local node (edge midpoints for CR1).
  [[nodiscard]] const std::vector<Eigen::Vector3d>& nodes() const noexcept { return nodes_; }

  /// Lagrange multi-index of each local node; empty for CR.
  [[nodiscard]] const std::vector<std::array<int, 3>>& multi_indices() const noexcept {
    return alphas_;
  }

  /// Values, derivatives d/dlambda_a and second derivatives d2/dlambda_a dlambda_b.
  void evaluate(const Eigen::Vector3d& bary, std::span<double> values,
                std::span<Eigen::Vector3d> d1, std::span<Eigen::Matrix3d> d2) const;

 private:
  ElementType type_;
  std::vector<Eigen::Vector3d> nodes_;
  std::vector<std::array<int, 3>> alphas_;
};

/// Basis data of one cell at one point, with derivatives in physical coordinates.
struct BasisValues {
  std::vector<double> values;
  std::vector<Point> gradients;
  std::vector<Eigen::Matrix2d> hessians;
};

/// Trial/test space on a mesh. Constrained dofs are removed from the numbering;
/// their slot in the local-to-global map is invalid_index.
class FiniteElementSpace {
 public:
  FiniteElementSpace(std::shared_ptr<const TriangleMesh> mesh, ElementType type,
                     Constraint constraint);

  [[nodiscard]] const TriangleMesh& mesh() const noexcept { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const TriangleMesh>& mesh_ptr() const noexcept {
    return mesh_;
  }
  [[nodiscard]] ElementType type() const noexcept { return type_; }
  [[nodiscard]] Constraint constraint() const noexcept { return constraint_; }
  [[nodiscard]] const ReferenceElement& reference() const noexcept { return reference_; }
  [[nodiscard]] bool conforming() const noexcept { return type_.family == Family::Lagrange; }

  [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
  /// Number of dofs before constraints are applied.
  [[nodiscard]] std::size_t unconstrained_dimension() const noexcept {
    return unconstrained_coords_.size();
  }
  [[nodiscard]] int dofs_per_cell() const noexcept { return reference_.num_dofs(); }
  [[nodiscard]] std::span<const Index> cell_dofs(Index cell) const {
    const auto n = static_cast<std::size_t>(dofs_per_cell());
    return {dof_map_.data() + cell * n, n};
  }
  /// Location of each free dof.
  [[nodiscard]] const Point& dof_coordinate(Index dof) const { return dof_coords_[dof]; }

  /// Shape functions of `cell` at a barycentric point.
  void eval_basis(Index cell, const Eigen::Vector3d& bary, BasisValues& out) const;
  [[nodiscard]] BasisValues eval_basis(Index cell, const Eigen::Vector3d& bary) const;

 private:
  std::shared_ptr<const TriangleMesh> mesh_;
  ElementType type_;
  Constraint constraint_;
  ReferenceElement reference_;
  std::vector<Index> dof_map_;
  std::vector<Point> unconstrained_coords_;
  std::vector<Point> dof_coords_;
  std::size_t dimension_ = 0;
};

using SpacePtr = std::shared_ptr<const FiniteElementSpace>;

/// Validates the family/constraint combination and builds the space.
/// Throws std::invalid_argument for CR with k != 1, Lagrange k outside [1,4],
/// or constraints that do not belong to the family.
[[nodiscard]] SpacePtr build_space(std::shared_ptr<const TriangleMesh> mesh, ElementType type,
                                   Constraint constraint);

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

/// Coefficient vector over a space.
class FeFunction {
 public:
  FeFunction() = default;
  explicit FeFunction(SpacePtr space);
  FeFunction(SpacePtr space, Eigen::VectorXd coefficients);

  [[nodiscard]] const FiniteElementSpace& space() const { return *space_; }
  [[nodiscard]] const SpacePtr& space_ptr() const noexcept { return space_; }
  [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  [[nodiscard]] Eigen::VectorXd& coefficients() noexcept { return coefficients_; }

  [[nodiscard]] double value(Index cell, const Eigen::Vector3d& bary) const;
  [[nodiscard]] Point gradient(Index cell, const Eigen::Vector3d& bary) const;
  /// Broken Laplacian restricted to `cell`.
  [[nodiscard]] double laplacian(Index cell, const Eigen::Vector3d& bary) const;

 private:
  SpacePtr space_;
  Eigen::VectorXd coefficients_;
};

/// Dof values taken as point values of f at the dof locations (edge midpoints for CR1).
[[nodiscard]] FeFunction interpolate_nodal(const SpacePtr& space, const ScalarFunction& f);

}  // namespace qrfem
