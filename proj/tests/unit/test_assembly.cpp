// SPDX-License-Identifier: Apache-2.0
#include "invariants.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace qrfem;

namespace {

using MeshPtr = std::shared_ptr<const TriangleMesh>;

MeshPtr mesh_with(std::size_t nx, std::size_t ny, const std::set<Side>& gamma0,
                  std::optional<Box> omega = std::nullopt) {
  TriangleMesh m = tag_boundary(build_structured_mesh(nx, ny), gamma0);
  if (omega) m = tag_region(std::move(m), *omega, Region::OmegaData);
  return std::make_shared<const TriangleMesh>(std::move(m));
}

double quad(const SparseMatrix& a, const Eigen::VectorXd& x) { return x.dot(a * x); }

SpacePtr p(const MeshPtr& m, int k) { return build_space(m, ElementType::lagrange(k), Constraint::None); }

}  // namespace

TEST(Assembly, StiffnessOfLinearFunction) {
  qrfem::testing::Gen gen(1);
  for (int trial = 0; trial < 4; ++trial) {
    const auto s = p(mesh_with(gen.integer(1, 9), gen.integer(1, 9), {}), gen.integer(1, 3));
    const FeFunction x = interpolate_nodal(s, [](const Point& q) { return q.x(); });
    EXPECT_NEAR(quad(assemble_form(FormKind::BrokenStiffness, *s, *s), x.coefficients()), 1.0,
                1e-12);
    EXPECT_NEAR(quad(assemble_form(FormKind::L2Mass, *s, *s), x.coefficients()), 1.0 / 3.0, 1e-12);
  }
}

TEST(Assembly, BoundaryPartOfSStar) {
  for (std::size_t ny : {2U, 5U, 8U}) {
    const auto s = p(mesh_with(3, ny, {}), 1);
    const FeFunction x = interpolate_nodal(s, [](const Point& q) { return q.x(); });
    const SparseMatrix rest = assemble_form(FormKind::SStar, *s, *s) -
                              assemble_form(FormKind::JumpPenalty, *s, *s) -
                              assemble_form(FormKind::ElementLaplacian, *s, *s);
    EXPECT_NEAR(quad(rest, x.coefficients()), 2.0 / double(ny), 1e-12);
  }
}

TEST(Assembly, CrouzeixRaviartJumpOracle) {
  // One interior facet (the diagonal); the normal derivative jump is 8/sqrt(2).
  const auto mesh = mesh_with(1, 1, {});
  const auto s = build_space(mesh, ElementType::crouzeix_raviart(), Constraint::CRZeroMeanAll);
  ASSERT_EQ(s->dimension(), 1U);
  EXPECT_NEAR(assemble_form(FormKind::JumpPenalty, *s, *s).coeff(0, 0), 64.0, 1e-12);
  EXPECT_NEAR(assemble_form(FormKind::BrokenStiffness, *s, *s).coeff(0, 0), 8.0, 1e-12);
}

TEST(Assembly, OmegaMassOnWholeDomain) {
  const auto mesh = mesh_with(4, 3, {}, Box{});
  const auto s = p(mesh, 2);
  const SparseMatrix d = assemble_form(FormKind::OmegaMass, *s, *s) -
                         assemble_form(FormKind::L2Mass, *s, *s);
  EXPECT_LT(qrfem::testing::max_abs(d), 1e-15);
}

TEST(Assembly, InverseH2WeightsOnUniformMesh) {
  const auto mesh = mesh_with(4, 4, {}, Box{0, 0.5, 0, 0.5});
  const auto s = p(mesh, 1);
  const double h = mesh->h();
  const SparseMatrix d = h * h * assemble_form(FormKind::OmegaMassInvH2, *s, *s) -
                         assemble_form(FormKind::OmegaMass, *s, *s);
  EXPECT_LT(qrfem::testing::max_abs(d), 1e-15);
  const auto one = [](Index, const Point&) { return 1.0; };
  const Eigen::VectorXd r = h * h * assemble_rhs(RhsKind::InteriorDataInvH2, *s, one) -
                            assemble_rhs(RhsKind::InteriorData, *s, one);
  EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, RightHandSides) {
  const auto mesh = mesh_with(3, 3, {Side::Left}, Box{});
  const auto s = p(mesh, 1);
  const auto one = [](Index, const Point&) { return 1.0; };
  EXPECT_NEAR(assemble_rhs(RhsKind::InteriorData, *s, one).sum(), 1.0, 1e-14);
  EXPECT_EQ(assemble_rhs(RhsKind::Source, *s, [](Index, const Point&) { return 0.0; }).norm(), 0.0);
  EXPECT_NEAR(assemble_rhs(RhsKind::NeumannGamma0, *s, one).sum(), 1.0, 1e-14);

  const auto cr = build_space(mesh, ElementType::crouzeix_raviart(), Constraint::CRZeroMeanOffGamma0);
  const Eigen::VectorXd b = assemble_rhs(RhsKind::NeumannGamma0, *cr, one);
  for (Index i = 0; i < cr->dimension(); ++i) {
    const bool on_left = cr->dof_coordinate(i).x() == 0.0;
    EXPECT_NEAR(b[Eigen::Index(i)], on_left ? 1.0 / 3.0 : 0.0, 1e-15);
  }
}

TEST(Assembly, NeumannFluxUsesOutwardNormal) {
  const auto s = p(mesh_with(4, 2, {Side::Left, Side::Bottom}), 2);
  const Eigen::VectorXd b = assemble_neumann_flux(*s, [](const Point&) { return Point(1.0, 2.0); });
  // Outward normals (-1,0) on the left and (0,-1) on the bottom.
  EXPECT_NEAR(b.sum(), -1.0 - 2.0, 1e-13);
}

TEST(Assembly, HadamardNeumannDataMatchesFlux) {
  const auto s = p(mesh_with(8, 8, {Side::Left, Side::Bottom}), 2);
  const HadamardProblem hp{3};
  const Eigen::VectorXd a =
      assemble_rhs(RhsKind::NeumannGamma0, *s, [&](Index, const Point& x) { return hp.neumann(x); });
  const Eigen::VectorXd b = assemble_neumann_flux(*s, [&](const Point& x) { return hp.gradient(x); });
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Assembly, ApplyStiffnessMatchesMatrix) {
  const auto mesh = mesh_with(5, 4, {});
  const auto trial = p(mesh, 2);
  const auto test = p(mesh, 3);
  qrfem::testing::Gen gen(4);
  const FeFunction u(trial, gen.vector(Eigen::Index(trial->dimension())));
  const Eigen::VectorXd direct = assemble_form(FormKind::BrokenStiffness, *trial, *test) *
                                 u.coefficients();
  EXPECT_LT((apply_stiffness(u, *test) - direct).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assembly, BrokenLaplacian) {
  const auto mesh = mesh_with(3, 3, {});
  const FeFunction lin = interpolate_nodal(p(mesh, 1), [](const Point& q) { return q.x() + q.y(); });
  const FeFunction sq = interpolate_nodal(p(mesh, 2), [](const Point& q) { return q.x() * q.x(); });
  const FeFunction cub = interpolate_nodal(
      p(mesh, 3), [](const Point& q) { return q.x() * q.x() * q.x() + q.y() * q.y() * q.y(); });
  const BrokenField l1 = broken_laplacian(lin);
  const BrokenField l2 = broken_laplacian(sq);
  const BrokenField l3 = broken_laplacian(cub);
  qrfem::testing::Gen gen(8);
  for (Index c = 0; c < mesh->num_cells(); ++c) {
    const Eigen::Vector3d b = gen.bary();
    const Point x = mesh->map_to_physical(c, b);
    EXPECT_NEAR(l1(c, b), 0.0, 1e-12);
    EXPECT_NEAR(l2(c, b), 2.0, 1e-10);
    EXPECT_NEAR(l3(c, b), 6.0 * x.x() + 6.0 * x.y(), 1e-9);
  }
}

TEST(Assembly, ErrorCases) {
  const auto a = p(mesh_with(2, 2, {}), 1);
  const auto b = p(mesh_with(3, 3, {}), 1);
  EXPECT_THROW((void)assemble_form(FormKind::L2Mass, *a, *b), std::invalid_argument);
  EXPECT_THROW((void)assemble_form(FormKind::OmegaMass, *a, *a), std::invalid_argument);
  EXPECT_THROW((void)assemble_form(FormKind::Gamma0Mass, *a, *a), std::invalid_argument);
  EXPECT_THROW((void)assemble_rhs(RhsKind::NeumannGamma0, *a,
                                  [](Index, const Point&) { return 1.0; }),
               std::invalid_argument);
}

TEST(Assembly, DeterministicAssembly) {
  const auto s = p(mesh_with(6, 6, {}), 3);
  const SparseMatrix a = assemble_form(FormKind::SStar, *s, *s);
  const SparseMatrix b = assemble_form(FormKind::SStar, *s, *s);
  ASSERT_EQ(a.nonZeros(), b.nonZeros());
  EXPECT_EQ(SparseMatrix(a - b).norm(), 0.0);
}

TEST(Assembly, WriteMatrixFormat) {
  SparseMatrix m(2, 3);
  m.insert(0, 1) = 2.5;
  m.insert(1, 2) = -1.0;
  std::ostringstream os;
  write_matrix(os, m);
  std::istringstream is(os.str());
  std::size_t rows = 0, cols = 0, nnz = 0;
  is >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 2U);
  EXPECT_EQ(cols, 3U);
  EXPECT_EQ(nnz, 2U);
}

TEST(Assembly, AlgebraicInvariants) {
  for (const auto& r : {qrfem::testing::check_stiffness_kernel(), qrfem::testing::check_form_symmetry(),
                        qrfem::testing::check_jump_vanishes_on_smooth(31)}) {
    EXPECT_TRUE(r.ok) << r.name << ": " << r.detail;
  }
}
