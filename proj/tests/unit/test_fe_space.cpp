// SPDX-License-Identifier: Apache-2.0
#include "invariants.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <set>

using namespace qrfem;

namespace {

using MeshPtr = std::shared_ptr<const TriangleMesh>;

MeshPtr unit_mesh(std::size_t nx, std::size_t ny, const std::set<Side>& gamma0 = {}) {
  return std::make_shared<const TriangleMesh>(
      tag_boundary(build_structured_mesh(nx, ny), gamma0));
}

struct Counts {
  std::size_t vertices = 0;
  std::size_t edges = 0;
};

/// Closed vertex and edge counts of the boundary facets selected by `pred`.
template <class Pred>
Counts boundary_counts(const TriangleMesh& m, Pred pred) {
  std::set<Index> verts;
  Counts c;
  for (const Facet& f : m.facets()) {
    if (!f.is_boundary() || !pred(f)) continue;
    ++c.edges;
    verts.insert(f.vertices.begin(), f.vertices.end());
  }
  c.vertices = verts.size();
  return c;
}

std::size_t lagrange_dim(const TriangleMesh& m, int k, Counts removed) {
  const auto kk = static_cast<std::size_t>(k);
  const std::size_t full = m.num_vertices() + (kk - 1) * m.num_facets() +
                           (kk - 1) * (kk - 2) / 2 * m.num_cells();
  return full - removed.vertices - (kk - 1) * removed.edges;
}

/// Cell containing p and its barycentric coordinates.
std::pair<Index, Eigen::Vector3d> locate(const TriangleMesh& m, const Point& p) {
  for (Index c = 0; c < m.num_cells(); ++c) {
    const auto& g = m.barycentric_gradients(c);
    const Point d = p - m.vertex(m.cell(c)[0]);
    Eigen::Vector3d b(1.0 + g[0].dot(d), g[1].dot(d), g[2].dot(d));
    if (b.minCoeff() >= -1e-12) return {c, b};
  }
  throw std::logic_error("point outside mesh");
}

double lambda_max(const SparseMatrix& a, const SparseMatrix& b) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Eigen::MatrixXd(a), Eigen::MatrixXd(b), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST(FeSpace, DimensionFormulasOnRandomMeshes) {
  qrfem::testing::Gen gen(3);
  const auto on_g0 = [](const Facet& f) { return f.tag == BoundaryPart::Gamma0; };
  const auto on_g1 = [](const Facet& f) { return f.tag == BoundaryPart::Gamma1; };
  const auto any = [](const Facet&) { return true; };
  for (int trial = 0; trial < 5; ++trial) {
    const auto mesh = unit_mesh(gen.integer(1, 7), gen.integer(1, 7), {Side::Left, Side::Bottom});
    const TriangleMesh& m = *mesh;
    for (int k = 1; k <= 4; ++k) {
      const auto t = ElementType::lagrange(k);
      EXPECT_EQ(build_space(mesh, t, Constraint::None)->dimension(), lagrange_dim(m, k, {}));
      EXPECT_EQ(build_space(mesh, t, Constraint::ZeroOnBoundary)->dimension(),
                lagrange_dim(m, k, boundary_counts(m, any)));
      EXPECT_EQ(build_space(mesh, t, Constraint::ZeroOnGamma0)->dimension(),
                lagrange_dim(m, k, boundary_counts(m, on_g0)));
      EXPECT_EQ(build_space(mesh, t, Constraint::ZeroOnGamma1)->dimension(),
                lagrange_dim(m, k, boundary_counts(m, on_g1)));
    }
    const auto cr = ElementType::crouzeix_raviart();
    const std::size_t interior = m.num_facets() - boundary_counts(m, any).edges;
    EXPECT_EQ(build_space(mesh, cr, Constraint::None)->dimension(), m.num_facets());
    EXPECT_EQ(build_space(mesh, cr, Constraint::CRZeroMeanAll)->dimension(), interior);
    EXPECT_EQ(build_space(mesh, cr, Constraint::CRZeroMeanOffGamma0)->dimension(),
              interior + boundary_counts(m, on_g0).edges);
  }
}

TEST(FeSpace, SmallExamples) {
  EXPECT_EQ(build_space(unit_mesh(1, 1), ElementType::lagrange(1), Constraint::None)->dimension(),
            4U);
  EXPECT_EQ(
      build_space(unit_mesh(2, 2), ElementType::lagrange(2), Constraint::ZeroOnBoundary)->dimension(),
      9U);
  EXPECT_EQ(build_space(unit_mesh(1, 1), ElementType::crouzeix_raviart(), Constraint::CRZeroMeanAll)
                ->dimension(),
            1U);
}

TEST(FeSpace, RejectsInvalidCombinations) {
  const auto mesh = unit_mesh(2, 2);
  EXPECT_THROW((void)build_space(mesh, {Family::CrouzeixRaviart, 2}, Constraint::None),
               std::invalid_argument);
  EXPECT_THROW((void)build_space(mesh, ElementType::lagrange(5), Constraint::None),
               std::invalid_argument);
  EXPECT_THROW((void)build_space(mesh, ElementType::lagrange(0), Constraint::None),
               std::invalid_argument);
  EXPECT_THROW((void)build_space(mesh, ElementType::lagrange(2), Constraint::CRZeroMeanAll),
               std::invalid_argument);
  EXPECT_THROW(
      (void)build_space(mesh, ElementType::crouzeix_raviart(), Constraint::ZeroOnBoundary),
      std::invalid_argument);
}

TEST(FeSpace, KroneckerAtNodes) {
  const auto mesh = unit_mesh(3, 2);
  std::vector<ElementType> types{ElementType::crouzeix_raviart()};
  for (int k = 1; k <= 4; ++k) types.push_back(ElementType::lagrange(k));
  for (const ElementType t : types) {
    const auto space = build_space(mesh, t, Constraint::None);
    const auto& nodes = space->reference().nodes();
    for (Index c = 0; c < mesh->num_cells(); ++c) {
      const auto dofs = space->cell_dofs(c);
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const BasisValues bv = space->eval_basis(c, nodes[j]);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          EXPECT_NEAR(bv.values[i], i == j ? 1.0 : 0.0, 1e-12) << to_string(t);
        }
        const Point x = mesh->map_to_physical(c, nodes[j]);
        EXPECT_LT((space->dof_coordinate(dofs[j]) - x).norm(), 1e-14);
      }
    }
  }
}

TEST(FeSpace, InterpolationExamples) {
  const auto mesh = unit_mesh(4, 4);
  for (const ElementType t : {ElementType::lagrange(1), ElementType::lagrange(3),
                              ElementType::crouzeix_raviart()}) {
    const FeFunction one = interpolate_nodal(build_space(mesh, t, Constraint::None),
                                             [](const Point&) { return 1.0; });
    EXPECT_LT((one.coefficients().array() - 1.0).abs().maxCoeff(), 1e-15);
  }
  const FeFunction x = interpolate_nodal(build_space(mesh, ElementType::lagrange(1), Constraint::None),
                                         [](const Point& p) { return p.x(); });
  const auto [c, b] = locate(*mesh, Point(0.3, 0.7));
  EXPECT_NEAR(x.value(c, b), 0.3, 1e-14);

  const FeFunction xy = interpolate_nodal(build_space(mesh, ElementType::lagrange(2), Constraint::None),
                                          [](const Point& p) { return p.x() * p.y(); });
  qrfem::testing::Gen gen(9);
  for (int i = 0; i < 200; ++i) {
    const Point p(gen.uniform(), gen.uniform());
    const auto [cell, bary] = locate(*mesh, p);
    EXPECT_NEAR(xy.value(cell, bary), p.x() * p.y(), 1e-13);
    EXPECT_LT((xy.gradient(cell, bary) - Point(p.y(), p.x())).norm(), 1e-12);
  }
}

TEST(FeSpace, ConstrainedInterpolationVanishes) {
  const auto mesh = unit_mesh(4, 3, {Side::Left, Side::Bottom});
  const auto space = build_space(mesh, ElementType::lagrange(2), Constraint::ZeroOnGamma0);
  const FeFunction u = interpolate_nodal(space, [](const Point& p) { return 1.0 + p.x() + p.y(); });
  for (Index f = 0; f < mesh->num_facets(); ++f) {
    const Facet& fa = mesh->facet(f);
    if (fa.tag != BoundaryPart::Gamma0) continue;
    Eigen::Vector3d b = Eigen::Vector3d::Constant(0.5);
    b[fa.local[0]] = 0.0;
    EXPECT_NEAR(u.value(fa.cells[0], b), 0.0, 1e-15);
  }
}

TEST(FeSpace, ConformityAndPartitionOfUnity) {
  for (const auto& r : {qrfem::testing::check_lagrange_conformity(21),
                        qrfem::testing::check_partition_of_unity(22)}) {
    EXPECT_TRUE(r.ok) << r.name << ": " << r.detail;
  }
}

TEST(FeSpace, CrouzeixRaviartProperties) {
  for (const auto& r : {qrfem::testing::check_cr_weak_continuity(23),
                        qrfem::testing::check_cr_bubble_orthogonality(24)}) {
    EXPECT_TRUE(r.ok) << r.name << ": " << r.detail;
  }
}

// Constants of the discrete inequalities, estimated as extreme generalized
// eigenvalues, stay bounded and do not grow under refinement.
TEST(FeSpace, InverseInequalityConstant) {
  for (int k : {1, 2}) {
    std::vector<double> c;
    for (std::size_t n : k == 1 ? std::vector<std::size_t>{8, 16, 32}
                                : std::vector<std::size_t>{8, 16}) {
      const auto s = build_space(unit_mesh(n, n), ElementType::lagrange(k), Constraint::None);
      const double h = s->mesh().h();
      c.push_back(h * h * lambda_max(assemble_form(FormKind::BrokenStiffness, *s, *s),
                                     assemble_form(FormKind::L2Mass, *s, *s)));
    }
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LE(c[i], 1.05 * c[0]) << k;
    EXPECT_LT(c.back(), 200.0 * k * k);
  }
}

TEST(FeSpace, DiscreteTraceInequalityConstant) {
  for (int k : {1, 2}) {
    std::vector<double> c;
    for (std::size_t n : {4, 8, 16}) {
      const auto s = build_space(unit_mesh(n, n), ElementType::lagrange(k), Constraint::None);
      const SparseMatrix jumps = assemble_form(FormKind::JumpPenalty, *s, *s) +
                                 assemble_form(FormKind::NormalDerivBoundary, *s, *s);
      c.push_back(lambda_max(jumps, assemble_form(FormKind::BrokenH1, *s, *s)));
    }
    EXPECT_LE(c[2], 1.05 * c[0]) << k;
    EXPECT_LE(c[1], 1.05 * c[0]) << k;
  }
}

TEST(FeSpace, ContinuousTraceInequalityConstant) {
  std::vector<double> c;
  for (std::size_t n : {8, 16, 32}) {
    const auto mesh = unit_mesh(n, n, {Side::Left, Side::Right, Side::Bottom, Side::Top});
    const auto s = build_space(mesh, ElementType::lagrange(1), Constraint::None);
    const double h = mesh->h();
    const SparseMatrix rhs = SparseMatrix(assemble_form(FormKind::L2Mass, *s, *s) +
                                          h * h * assemble_form(FormKind::BrokenStiffness, *s, *s));
    c.push_back(h * lambda_max(assemble_form(FormKind::Gamma0Mass, *s, *s), rhs));
  }
  EXPECT_LE(c[1], 1.05 * c[0]);
  EXPECT_LE(c[2], 1.05 * c[0]);
}
