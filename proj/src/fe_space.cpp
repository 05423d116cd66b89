// SPDX-License-Identifier: Apache-2.0
#include "qrfem/fe_space.hpp"

#include <stdexcept>
#include <utility>

namespace qrfem {

std::string to_string(ElementType type) {
  if (type.family == Family::CrouzeixRaviart) return "CR1";
  return "P" + std::to_string(type.degree);
}

std::string to_string(Constraint constraint) {
  switch (constraint) {
    case Constraint::None: return "none";
    case Constraint::ZeroOnGamma0: return "zero_on_gamma0";
    case Constraint::ZeroOnGamma1: return "zero_on_gamma1";
    case Constraint::ZeroOnBoundary: return "zero_on_boundary";
    case Constraint::CRZeroMeanOffGamma0: return "cr_zero_mean_off_gamma0";
    case Constraint::CRZeroMeanAll: return "cr_zero_mean_all";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ReferenceElement

ReferenceElement::ReferenceElement(ElementType type) : type_(type) {
  if (type.family == Family::CrouzeixRaviart) {
    // Local dof i lives on the facet opposite vertex i.
    nodes_ = {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}};
    return;
  }
  const int k = type.degree;
  const auto push = [&](std::array<int, 3> alpha) {
    alphas_.push_back(alpha);
    nodes_.emplace_back(alpha[0] / double(k), alpha[1] / double(k), alpha[2] / double(k));
  };
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> alpha{0, 0, 0};
    alpha[i] = k;
    push(alpha);
  }
  for (int i = 0; i < 3; ++i) {
    const int a = (i + 1) % 3;
    const int b = (i + 2) % 3;
    for (int s = 1; s < k; ++s) {
      std::array<int, 3> alpha{0, 0, 0};
      alpha[a] = k - s;
      alpha[b] = s;
      push(alpha);
    }
  }
  for (int i = 1; i < k; ++i) {
    for (int j = 1; i + j < k; ++j) push({i, j, k - i - j});
  }
}

void ReferenceElement::evaluate(const Eigen::Vector3d& bary, std::span<double> values,
                                std::span<Eigen::Vector3d> d1,
                                std::span<Eigen::Matrix3d> d2) const {
  if (type_.family == Family::CrouzeixRaviart) {
    for (int i = 0; i < 3; ++i) {
      values[i] = 1.0 - 2.0 * bary[i];
      d1[i] = Eigen::Vector3d::Zero();
      d1[i][i] = -2.0;
      d2[i].setZero();
    }
    return;
  }
  const int k = type_.degree;
  // g_m(t) = prod_{r<m} (k t - r) / (r + 1) with first and second derivatives.
  struct Factor {
    double g = 1.0, dg = 0.0, ddg = 0.0;
  };
  std::array<std::array<Factor, 5>, 3> table{};
  for (int a = 0; a < 3; ++a) {
    Factor f;
    table[a][0] = f;
    for (int r = 0; r < k; ++r) {
      const double lin = (k * bary[a] - r) / (r + 1.0);
      const double dlin = k / (r + 1.0);
      f = {f.g * lin, f.dg * lin + f.g * dlin, f.ddg * lin + 2.0 * f.dg * dlin};
      table[a][r + 1] = f;
    }
  }
  for (std::size_t n = 0; n < alphas_.size(); ++n) {
    const auto& al = alphas_[n];
    const Factor& f0 = table[0][al[0]];
    const Factor& f1 = table[1][al[1]];
    const Factor& f2 = table[2][al[2]];
    values[n] = f0.g * f1.g * f2.g;
    d1[n] = {f0.dg * f1.g * f2.g, f0.g * f1.dg * f2.g, f0.g * f1.g * f2.dg};
    Eigen::Matrix3d& h = d2[n];
    h(0, 0) = f0.ddg * f1.g * f2.g;
    h(1, 1) = f0.g * f1.ddg * f2.g;
    h(2, 2) = f0.g * f1.g * f2.ddg;
    h(0, 1) = h(1, 0) = f0.dg * f1.dg * f2.g;
    h(0, 2) = h(2, 0) = f0.dg * f1.g * f2.dg;
    h(1, 2) = h(2, 1) = f0.g * f1.dg * f2.dg;
  }
}

// ---------------------------------------------------------------------------
// FiniteElementSpace

namespace {

bool constraint_fits(ElementType type, Constraint c) {
  if (c == Constraint::None) return true;
  const bool cr_constraint =
      c == Constraint::CRZeroMeanAll || c == Constraint::CRZeroMeanOffGamma0;
  return (type.family == Family::CrouzeixRaviart) == cr_constraint;
}

bool facet_constrained(const Facet& f, Constraint c) {
  if (!f.is_boundary()) return false;
  switch (c) {
    case Constraint::None: return false;
    case Constraint::ZeroOnGamma0: return f.tag == BoundaryPart::Gamma0;
    case Constraint::ZeroOnGamma1: return f.tag == BoundaryPart::Gamma1;
    case Constraint::ZeroOnBoundary: return true;
    case Constraint::CRZeroMeanOffGamma0: return f.tag != BoundaryPart::Gamma0;
    case Constraint::CRZeroMeanAll: return true;
  }
  return false;
}

}  // namespace

FiniteElementSpace::FiniteElementSpace(std::shared_ptr<const TriangleMesh> mesh,
                                       ElementType type, Constraint constraint)
    : mesh_(std::move(mesh)), type_(type), constraint_(constraint), reference_(type) {
  const TriangleMesh& m = *mesh_;
  const std::size_t nloc = static_cast<std::size_t>(reference_.num_dofs());
  const std::size_t nc = m.num_cells();
  std::vector<Index> raw_map(nc * nloc);
  std::vector<char> constrained;

  if (type.family == Family::CrouzeixRaviart) {
    unconstrained_coords_.resize(m.num_facets());
    constrained.assign(m.num_facets(), 0);
    for (Index f = 0; f < m.num_facets(); ++f) {
      const Facet& fa = m.facet(f);
      unconstrained_coords_[f] = 0.5 * (m.vertex(fa.vertices[0]) + m.vertex(fa.vertices[1]));
      constrained[f] = facet_constrained(fa, constraint) ? 1 : 0;
    }
    for (Index c = 0; c < nc; ++c) {
      for (int i = 0; i < 3; ++i) raw_map[c * nloc + i] = m.cell_facets(c)[i];
    }
  } else {
    const int k = type.degree;
    const std::size_t nv = m.num_vertices();
    const std::size_t ne = m.num_facets();
    const std::size_t per_edge = static_cast<std::size_t>(k - 1);
    const std::size_t per_cell = static_cast<std::size_t>((k - 1) * (k - 2) / 2);
    const std::size_t total = nv + ne * per_edge + nc * per_cell;
    unconstrained_coords_.resize(total);
    constrained.assign(total, 0);
    const auto& alphas = reference_.multi_indices();

    for (Index c = 0; c < nc; ++c) {
      const auto& verts = m.cell(c);
      std::size_t interior = 0;
      for (std::size_t n = 0; n < nloc; ++n) {
        const auto& al = alphas[n];
        const int zeros = (al[0] == 0) + (al[1] == 0) + (al[2] == 0);
        Index id = 0;
        if (zeros == 2) {
          const int i = al[0] == k ? 0 : (al[1] == k ? 1 : 2);
          id = verts[i];
        } else if (zeros == 1) {
          const int i = al[0] == 0 ? 0 : (al[1] == 0 ? 1 : 2);
          const int a = (i + 1) % 3;
          const Index facet = m.cell_facets(c)[i];
          // Position counted from the facet's lower-numbered vertex.
          const int s = (verts[a] == m.facet(facet).vertices[0]) ? al[(i + 2) % 3] : al[a];
          id = nv + facet * per_edge + static_cast<std::size_t>(s - 1);
        } else {
          id = nv + ne * per_edge + c * per_cell + interior++;
        }
        raw_map[c * nloc + n] = id;
        unconstrained_coords_[id] = m.map_to_physical(c, reference_.nodes()[n]);
      }
    }
    for (Index f = 0; f < ne; ++f) {
      const Facet& fa = m.facet(f);
      if (!facet_constrained(fa, constraint)) continue;
      constrained[fa.vertices[0]] = 1;
      constrained[fa.vertices[1]] = 1;
      for (std::size_t p = 0; p < per_edge; ++p) constrained[nv + f * per_edge + p] = 1;
    }
  }

  std::vector<Index> renumber(constrained.size(), invalid_index);
  for (Index id = 0; id < constrained.size(); ++id) {
    if (constrained[id]) continue;
    renumber[id] = dimension_++;
    dof_coords_.push_back(unconstrained_coords_[id]);
  }
  dof_map_.resize(raw_map.size());
  for (std::size_t i = 0; i < raw_map.size(); ++i) dof_map_[i] = renumber[raw_map[i]];
}

void FiniteElementSpace::eval_basis(Index cell, const Eigen::Vector3d& bary,
                                    BasisValues& out) const {
  const auto n = static_cast<std::size_t>(reference_.num_dofs());
  out.values.resize(n);
  out.gradients.resize(n);
  out.hessians.resize(n);
  std::array<Eigen::Vector3d, 20> d1;
  std::array<Eigen::Matrix3d, 20> d2;
  reference_.evaluate(bary, out.values, std::span(d1.data(), n), std::span(d2.data(), n));
  const auto& g = mesh_->barycentric_gradients(cell);
  for (std::size_t i = 0; i < n; ++i) {
    out.gradients[i] = d1[i][0] * g[0] + d1[i][1] * g[1] + d1[i][2] * g[2];
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) hess += d2[i](a, b) * g[a] * g[b].transpose();
    }
    out.hessians[i] = hess;
  }
}

BasisValues FiniteElementSpace::eval_basis(Index cell, const Eigen::Vector3d& bary) const {
  BasisValues out;
  eval_basis(cell, bary, out);
  return out;
}

SpacePtr build_space(std::shared_ptr<const TriangleMesh> mesh, ElementType type,
                     Constraint constraint) {
  if (!mesh) throw std::invalid_argument("build_space: null mesh");
  if (type.family == Family::CrouzeixRaviart && type.degree != 1) {
    throw std::invalid_argument("Crouzeix-Raviart spaces are available for k = 1 only");
  }
  if (type.family == Family::Lagrange && (type.degree < 1 || type.degree > 4)) {
    throw std::invalid_argument("Lagrange degree must lie in [1, 4]");
  }
  if (!constraint_fits(type, constraint)) {
    throw std::invalid_argument("constraint " + to_string(constraint) + " does not apply to " +
                                to_string(type));
  }
  return std::make_shared<const FiniteElementSpace>(std::move(mesh), type, constraint);
}

// ---------------------------------------------------------------------------
// FeFunction

FeFunction::FeFunction(SpacePtr space)
    : space_(std::move(space)), coefficients_(Eigen::VectorXd::Zero(space_->dimension())) {}

FeFunction::FeFunction(SpacePtr space, Eigen::VectorXd coefficients)
    : space_(std::move(space)), coefficients_(std::move(coefficients)) {
  if (static_cast<std::size_t>(coefficients_.size()) != space_->dimension()) {
    throw std::invalid_argument("coefficient vector length does not match space dimension");
  }
}

double FeFunction::value(Index cell, const Eigen::Vector3d& bary) const {
  thread_local BasisValues b;
  space_->eval_basis(cell, bary, b);
  const auto dofs = space_->cell_dofs(cell);
  double v = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] != invalid_index) v += coefficients_[dofs[i]] * b.values[i];
  }
  return v;
}

Point FeFunction::gradient(Index cell, const Eigen::Vector3d& bary) const {
  thread_local BasisValues b;
  space_->eval_basis(cell, bary, b);
  const auto dofs = space_->cell_dofs(cell);
  Point g = Point::Zero();
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] != invalid_index) g += coefficients_[dofs[i]] * b.gradients[i];
  }
  return g;
}

double FeFunction::laplacian(Index cell, const Eigen::Vector3d& bary) const {
  thread_local BasisValues b;
  space_->eval_basis(cell, bary, b);
  const auto dofs = space_->cell_dofs(cell);
  double v = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] != invalid_index) v += coefficients_[dofs[i]] * b.hessians[i].trace();
  }
  return v;
}

FeFunction interpolate_nodal(const SpacePtr& space, const ScalarFunction& f) {
  FeFunction u(space);
  for (Index d = 0; d < space->dimension(); ++d) u.coefficients()[d] = f(space->dof_coordinate(d));
  return u;
}

}  // namespace qrfem
