// SPDX-License-Identifier: Apache-2.0
#include "qrfem/assembly.hpp"

#include "qrfem/quadrature.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qrfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

int poly_degree(const FiniteElementSpace& s) { return s.type().degree; }

int clamp_order(int order) { return std::clamp(order, 0, max_quadrature_order); }

void check_same_mesh(const FiniteElementSpace& a, const FiniteElementSpace& b) {
  if (&a.mesh() != &b.mesh()) {
    throw std::invalid_argument("trial and test spaces live on different meshes");
  }
}

/// Barycentric coordinates in `cell` of the point at parameter t along facet f,
/// measured from f.vertices[0].
Eigen::Vector3d facet_point(const TriangleMesh& mesh, const Facet& f, Index cell, double t) {
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();
  const auto& verts = mesh.cell(cell);
  for (int j = 0; j < 3; ++j) {
    if (verts[j] == f.vertices[0]) bary[j] = 1.0 - t;
    if (verts[j] == f.vertices[1]) bary[j] = t;
  }
  return bary;
}

/// Volume integral sum_K w_K int_K kernel(test_i, trial_j) over cells accepted by `use_cell`.
template <typename CellFilter, typename CellWeight, typename Kernel>
SparseMatrix assemble_cells(const FiniteElementSpace& trial, const FiniteElementSpace& test,
                            int order, CellFilter use_cell, CellWeight cell_weight,
                            Kernel kernel) {
  const TriangleMesh& mesh = trial.mesh();
  const TriangleRule& rule = cached_triangle_rule(clamp_order(order));
  const int nt = trial.dofs_per_cell();
  const int ns = test.dofs_per_cell();
  Triplets triplets;
  triplets.reserve(mesh.num_cells() * static_cast<std::size_t>(nt * ns));
  Eigen::MatrixXd local(ns, nt);
  BasisValues bt, bs;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    if (!use_cell(c)) continue;
    local.setZero();
    const double scale = 2.0 * mesh.area(c) * cell_weight(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      trial.eval_basis(c, rule.points[q], bt);
      test.eval_basis(c, rule.points[q], bs);
      const double w = rule.weights[q] * scale;
      for (int i = 0; i < ns; ++i) {
        for (int j = 0; j < nt; ++j) local(i, j) += w * kernel(bs, i, bt, j);
      }
    }
    const auto rows = test.cell_dofs(c);
    const auto cols = trial.cell_dofs(c);
    for (int i = 0; i < ns; ++i) {
      if (rows[i] == invalid_index) continue;
      for (int j = 0; j < nt; ++j) {
        if (cols[j] == invalid_index) continue;
        triplets.emplace_back(static_cast<int>(rows[i]), static_cast<int>(cols[j]), local(i, j));
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(test.dimension()),
                 static_cast<Eigen::Index>(trial.dimension()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

struct FacetTrace {
  std::vector<std::pair<Index, double>> entries;
};

/// Collects (global dof, coefficient) pairs of every shape function on the
/// cells adjacent to facet f at parameter t. `coefficient(basis, i, side)`
/// returns the contribution of local dof i on side 0 or 1.
template <typename Coefficient>
void facet_trace(const FiniteElementSpace& space, const Facet& f, double t, BasisValues& b,
                 Coefficient coefficient, FacetTrace& out) {
  out.entries.clear();
  const TriangleMesh& mesh = space.mesh();
  for (int side = 0; side < 2; ++side) {
    const Index c = f.cells[side];
    if (c == invalid_index) break;
    space.eval_basis(c, facet_point(mesh, f, c, t), b);
    const auto dofs = space.cell_dofs(c);
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      if (dofs[i] == invalid_index) continue;
      out.entries.emplace_back(dofs[i], coefficient(b, static_cast<int>(i), side));
    }
  }
}

/// Facet integral sum_F w_F int_F trace_test * trace_trial over accepted facets.
template <typename FacetFilter, typename Coefficient>
SparseMatrix assemble_facets(const FiniteElementSpace& trial, const FiniteElementSpace& test,
                             int order, FacetFilter use_facet, bool weight_by_h,
                             Coefficient coefficient) {
  const TriangleMesh& mesh = trial.mesh();
  const EdgeRule& rule = cached_edge_rule(clamp_order(order));
  Triplets triplets;
  BasisValues b;
  FacetTrace tt, ts;
  for (Index fi = 0; fi < mesh.num_facets(); ++fi) {
    const Facet& f = mesh.facet(fi);
    if (!use_facet(f)) continue;
    const double scale = f.length * (weight_by_h ? f.length : 1.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      facet_trace(trial, f, t, b, [&](const BasisValues& bv, int i, int side) {
        return coefficient(f, bv, i, side);
      }, tt);
      facet_trace(test, f, t, b, [&](const BasisValues& bv, int i, int side) {
        return coefficient(f, bv, i, side);
      }, ts);
      const double w = rule.weights[q] * scale;
      for (const auto& [row, cs] : ts.entries) {
        for (const auto& [col, ct] : tt.entries) {
          triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), w * cs * ct);
        }
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(test.dimension()),
                 static_cast<Eigen::Index>(trial.dimension()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

auto all_cells() {
  return [](Index) { return true; };
}
auto unit_weight() {
  return [](Index) { return 1.0; };
}

double stiffness_kernel(const BasisValues& bs, int i, const BasisValues& bt, int j) {
  return bs.gradients[i].dot(bt.gradients[j]);
}
double mass_kernel(const BasisValues& bs, int i, const BasisValues& bt, int j) {
  return bs.values[i] * bt.values[j];
}
double h1_kernel(const BasisValues& bs, int i, const BasisValues& bt, int j) {
  return bs.values[i] * bt.values[j] + bs.gradients[i].dot(bt.gradients[j]);
}
double laplacian_kernel(const BasisValues& bs, int i, const BasisValues& bt, int j) {
  return bs.hessians[i].trace() * bt.hessians[j].trace();
}

void require_omega(const TriangleMesh& mesh) {
  if (mesh.count_region(Region::OmegaData) == 0) {
    throw std::invalid_argument("form needs a non-empty omega region");
  }
}

void require_gamma0(const TriangleMesh& mesh) {
  if (mesh.count_boundary(BoundaryPart::Gamma0) == 0) {
    throw std::invalid_argument("form needs Gamma0 facets");
  }
}

SparseMatrix jump_penalty(const FiniteElementSpace& trial, const FiniteElementSpace& test) {
  const int order = std::max(0, poly_degree(trial) - 1) + std::max(0, poly_degree(test) - 1);
  return assemble_facets(
      trial, test, order, [](const Facet& f) { return !f.is_boundary(); }, true,
      [](const Facet& f, const BasisValues& b, int i, int side) {
        const double sign = side == 0 ? 1.0 : -1.0;
        return sign * b.gradients[i].dot(f.normal);
      });
}

SparseMatrix boundary_normal_derivative(const FiniteElementSpace& trial,
                                        const FiniteElementSpace& test, bool gamma0_only) {
  const int order = std::max(0, poly_degree(trial) - 1) + std::max(0, poly_degree(test) - 1);
  return assemble_facets(
      trial, test, order,
      [gamma0_only](const Facet& f) {
        return f.is_boundary() && (!gamma0_only || f.tag == BoundaryPart::Gamma0);
      },
      true,
      [](const Facet& f, const BasisValues& b, int i, int) {
        return b.gradients[i].dot(f.normal);
      });
}

SparseMatrix element_laplacian(const FiniteElementSpace& trial, const FiniteElementSpace& test) {
  const TriangleMesh& mesh = trial.mesh();
  const int order = std::max(0, poly_degree(trial) - 2) + std::max(0, poly_degree(test) - 2);
  return assemble_cells(
      trial, test, order, all_cells(),
      [&mesh](Index c) { return mesh.diameter(c) * mesh.diameter(c); }, laplacian_kernel);
}

}  // namespace

EntityFunction pointwise(ScalarFunction f) {
  return [f = std::move(f)](Index, const Point& x) { return f(x); };
}

SparseMatrix assemble_form(FormKind kind, const FiniteElementSpace& trial,
                           const FiniteElementSpace& test) {
  check_same_mesh(trial, test);
  const TriangleMesh& mesh = trial.mesh();
  const int mass_order = poly_degree(trial) + poly_degree(test);
  const int grad_order = std::max(0, mass_order - 2);
  const auto in_omega = [&mesh](Index c) { return mesh.has_region(c, Region::OmegaData); };

  switch (kind) {
    case FormKind::BrokenStiffness:
      return assemble_cells(trial, test, grad_order, all_cells(), unit_weight(),
                            stiffness_kernel);
    case FormKind::L2Mass:
      return assemble_cells(trial, test, mass_order, all_cells(), unit_weight(), mass_kernel);
    case FormKind::BrokenH1:
      return assemble_cells(trial, test, mass_order, all_cells(), unit_weight(), h1_kernel);
    case FormKind::ScaledBrokenH1:
      return assemble_cells(
          trial, test, mass_order, all_cells(),
          [&mesh](Index c) { return mesh.diameter(c) * mesh.diameter(c); }, h1_kernel);
    case FormKind::OmegaMass:
      require_omega(mesh);
      return assemble_cells(trial, test, mass_order, in_omega, unit_weight(), mass_kernel);
    case FormKind::OmegaMassInvH2:
      require_omega(mesh);
      return assemble_cells(
          trial, test, mass_order, in_omega,
          [&mesh](Index c) { return 1.0 / (mesh.diameter(c) * mesh.diameter(c)); },
          mass_kernel);
    case FormKind::Gamma0Mass:
      require_gamma0(mesh);
      return assemble_facets(
          trial, test, mass_order,
          [](const Facet& f) { return f.is_boundary() && f.tag == BoundaryPart::Gamma0; },
          false, [](const Facet&, const BasisValues& b, int i, int) { return b.values[i]; });
    case FormKind::JumpPenalty:
      return jump_penalty(trial, test);
    case FormKind::NormalDerivGamma0:
      require_gamma0(mesh);
      return boundary_normal_derivative(trial, test, true);
    case FormKind::NormalDerivBoundary:
      return boundary_normal_derivative(trial, test, false);
    case FormKind::ElementLaplacian:
      return element_laplacian(trial, test);
    case FormKind::SStar: {
      SparseMatrix s = jump_penalty(trial, test);
      s += boundary_normal_derivative(trial, test, false);
      s += element_laplacian(trial, test);
      return s;
    }
  }
  throw std::invalid_argument("unknown form kind");
}

Eigen::VectorXd assemble_rhs(RhsKind kind, const FiniteElementSpace& test,
                             const EntityFunction& data) {
  const TriangleMesh& mesh = test.mesh();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(test.dimension()));
  const int order = clamp_order(poly_degree(test) + 6);
  BasisValues bv;

  if (kind == RhsKind::NeumannGamma0) {
    require_gamma0(mesh);
    const EdgeRule& rule = cached_edge_rule(order);
    for (Index fi = 0; fi < mesh.num_facets(); ++fi) {
      const Facet& f = mesh.facet(fi);
      if (!f.is_boundary() || f.tag != BoundaryPart::Gamma0) continue;
      const Index c = f.cells[0];
      const auto dofs = test.cell_dofs(c);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Eigen::Vector3d bary = facet_point(mesh, f, c, rule.points[q]);
        test.eval_basis(c, bary, bv);
        const double w = rule.weights[q] * f.length * data(fi, mesh.map_to_physical(c, bary));
        for (std::size_t i = 0; i < dofs.size(); ++i) {
          if (dofs[i] != invalid_index) b[dofs[i]] += w * bv.values[i];
        }
      }
    }
    return b;
  }

  const bool omega_only = kind == RhsKind::InteriorData || kind == RhsKind::InteriorDataInvH2;
  const TriangleRule& rule = cached_triangle_rule(order);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    if (omega_only && !mesh.has_region(c, Region::OmegaData)) continue;
    double scale = 2.0 * mesh.area(c);
    if (kind == RhsKind::InteriorDataInvH2) scale /= mesh.diameter(c) * mesh.diameter(c);
    const auto dofs = test.cell_dofs(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      test.eval_basis(c, rule.points[q], bv);
      const double w = rule.weights[q] * scale * data(c, mesh.map_to_physical(c, rule.points[q]));
      for (std::size_t i = 0; i < dofs.size(); ++i) {
        if (dofs[i] != invalid_index) b[dofs[i]] += w * bv.values[i];
      }
    }
  }
  return b;
}

Eigen::VectorXd assemble_neumann_flux(const FiniteElementSpace& test, const VectorFunction& flux) {
  const TriangleMesh& mesh = test.mesh();
  require_gamma0(mesh);
  return assemble_rhs(RhsKind::NeumannGamma0, test, [&](Index fi, const Point& x) {
    return flux(x).dot(mesh.facet(fi).normal);
  });
}

Eigen::VectorXd apply_stiffness(const FeFunction& u, const FiniteElementSpace& test) {
  return assemble_form(FormKind::BrokenStiffness, u.space(), test) * u.coefficients();
}

BrokenField broken_laplacian(const FeFunction& u) {
  return [u](Index cell, const Eigen::Vector3d& bary) { return u.laplacian(cell, bary); };
}

void write_matrix(std::ostream& out, const SparseMatrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  for (int k = 0; k < matrix.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace qrfem
