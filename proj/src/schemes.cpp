// SPDX-License-Identifier: Apache-2.0
#include "qrfem/schemes.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qrfem {

std::string to_string(Problem p) {
  return p == Problem::Cauchy ? "cauchy" : "unique_continuation";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Regularized: return "regularized";
    case Variant::L2Stabilized: return "l2_stabilized";
    case Variant::Unregularized: return "unregularized";
  }
  return "unknown";
}

void validate(const SchemeConfig& config) {
  const auto fail = [](const std::string& why) { throw std::invalid_argument(why); };
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) fail("gamma must lie in (0, 1)");
  if (config.variant != Variant::Unregularized &&
      !(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    fail("epsilon must lie in (0, 1)");
  }
  if (config.primal_degree < 1 || config.primal_degree > 4) {
    fail("primal degree must lie in [1, 4]");
  }
  if (config.dual.family == Family::CrouzeixRaviart && config.dual.degree != 1) {
    fail("Crouzeix-Raviart dual space is available for k = 1 only");
  }
  if (config.dual.family == Family::Lagrange && (config.dual.degree < 1 || config.dual.degree > 4)) {
    fail("dual Lagrange degree must lie in [1, 4]");
  }
  if (config.variant == Variant::Unregularized &&
      (config.primal_degree != 1 || config.dual.family != Family::CrouzeixRaviart)) {
    fail("the unregularized scheme needs the P1 / CR1 pair");
  }
  if (config.variant == Variant::L2Stabilized && config.problem != Problem::UniqueContinuation) {
    fail("the L2-stabilized scheme exists for unique continuation only");
  }
  if (config.problem == Problem::UniqueContinuation && !config.data.q) {
    fail("unique continuation needs interior data q");
  }
  if (config.problem == Problem::Cauchy && !config.data.phi) {
    fail("the Cauchy problem needs Neumann data phi");
  }
  if (config.noise && !(config.noise->amplitude >= 0.0)) fail("noise amplitude must be >= 0");
}

Constraint primal_constraint(Problem problem) {
  return problem == Problem::Cauchy ? Constraint::ZeroOnGamma0 : Constraint::None;
}

Constraint dual_constraint(Problem problem, ElementType dual) {
  const bool cr = dual.family == Family::CrouzeixRaviart;
  if (problem == Problem::Cauchy) {
    return cr ? Constraint::CRZeroMeanOffGamma0 : Constraint::ZeroOnGamma1;
  }
  return cr ? Constraint::CRZeroMeanAll : Constraint::ZeroOnBoundary;
}

DiscreteSystem build_system(const SchemeConfig& input, std::shared_ptr<const TriangleMesh> mesh) {
  validate(input);
  if (!mesh) throw std::invalid_argument("build_system: null mesh");
  if (input.problem == Problem::UniqueContinuation &&
      mesh->count_region(Region::OmegaData) == 0) {
    throw std::invalid_argument("unique continuation needs omega-tagged cells");
  }
  if (input.problem == Problem::Cauchy && mesh->count_boundary(BoundaryPart::Gamma0) == 0) {
    throw std::invalid_argument("the Cauchy problem needs Gamma0 facets");
  }
  const SchemeConfig config = input.noise ? perturb_data(input) : input;

  DiscreteSystem sys;
  sys.config = config;
  sys.primal = build_space(mesh, ElementType::lagrange(config.primal_degree),
                           primal_constraint(config.problem));
  sys.dual = build_space(mesh, config.dual, dual_constraint(config.problem, config.dual));
  const FiniteElementSpace& vp = *sys.primal;
  const FiniteElementSpace& vd = *sys.dual;
  const bool uc = config.problem == Problem::UniqueContinuation;
  const double eps = config.variant == Variant::Unregularized ? 0.0 : config.epsilon;
  const double g2 = config.gamma * config.gamma;

  BlockSystem& b = sys.blocks;
  b.a11 = SparseMatrix(static_cast<Eigen::Index>(vp.dimension()),
                       static_cast<Eigen::Index>(vp.dimension()));
  if (eps > 0.0) b.a11 = eps * assemble_form(FormKind::BrokenH1, vp, vp);
  if (uc) {
    b.a11 += assemble_form(config.variant == Variant::L2Stabilized ? FormKind::OmegaMassInvH2
                                                                   : FormKind::OmegaMass,
                           vp, vp);
  }
  b.a21 = assemble_form(FormKind::BrokenStiffness, vp, vd);
  b.a12 = b.a21.transpose();
  b.a22 = -g2 * assemble_form(
                    config.variant == Variant::L2Stabilized ? FormKind::SStar : FormKind::BrokenH1,
                    vd, vd);

  b.rhs_primal = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vp.dimension()));
  b.rhs_dual = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vd.dimension()));
  if (uc) {
    b.rhs_primal = assemble_rhs(config.variant == Variant::L2Stabilized
                                    ? RhsKind::InteriorDataInvH2
                                    : RhsKind::InteriorData,
                                vp, config.data.q);
  } else {
    b.rhs_dual += assemble_rhs(RhsKind::NeumannGamma0, vd, config.data.phi);
  }
  if (config.data.f) b.rhs_dual += assemble_rhs(RhsKind::Source, vd, config.data.f);
  return sys;
}

Solution solve(const DiscreteSystem& system) {
  BlockSolution x = solve_direct(system.blocks);
  return {FeFunction(system.primal, std::move(x.primal)),
          FeFunction(system.dual, std::move(x.dual)), x.relative_residual};
}

SparseMatrix triple_norm_gram(const DiscreteSystem& system) {
  const FiniteElementSpace& vp = *system.primal;
  const FiniteElementSpace& vd = *system.dual;
  const SchemeConfig& config = system.config;
  SparseMatrix np = config.variant == Variant::Unregularized
                        ? assemble_form(FormKind::ScaledBrokenH1, vp, vp)
                        : SparseMatrix(config.epsilon * assemble_form(FormKind::BrokenH1, vp, vp));
  if (config.problem == Problem::UniqueContinuation) {
    np += assemble_form(FormKind::OmegaMass, vp, vp);
  } else {
    np += assemble_form(FormKind::NormalDerivGamma0, vp, vp);
  }
  np += assemble_form(FormKind::JumpPenalty, vp, vp);
  np += assemble_form(FormKind::ElementLaplacian, vp, vp);
  const SparseMatrix nd =
      config.gamma * config.gamma * assemble_form(FormKind::BrokenH1, vd, vd);
  return block_diagonal(np, nd);
}

double couple_parameters(double s, double epsilon, CouplingRule rule) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (rule == CouplingRule::Standard) {
    if (!(s > 1.0)) throw std::invalid_argument("standard coupling needs s > 1");
    return std::pow(epsilon, 1.0 / (2.0 * s - 2.0));
  }
  if (!(s > 0.0)) throw std::invalid_argument("coupling needs s > 0");
  return std::pow(epsilon, 1.0 / (2.0 * s));
}

std::size_t snap_mesh_size(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh size must be positive");
  const double n = std::round(std::sqrt(2.0) / h);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

EntityFunction add_noise(EntityFunction base, double amplitude, std::uint64_t seed) {
  return [base = std::move(base), amplitude, seed](Index entity, const Point& x) {
    const double clean = base ? base(entity, x) : 0.0;
    return clean + amplitude * noise_value(seed, entity);
  };
}

}  // namespace

double noise_value(std::uint64_t seed, Index entity) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(entity));
  const double unit = static_cast<double>(bits >> 11U) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

SchemeConfig perturb_data(const SchemeConfig& config) {
  SchemeConfig out = config;
  out.noise.reset();
  if (!config.noise || config.noise->amplitude == 0.0) return out;
  const double delta = config.noise->amplitude;
  const std::uint64_t seed = config.noise->seed;
  out.data.q = add_noise(config.data.q, delta, seed ^ 0x71ULL);
  out.data.f = add_noise(config.data.f, delta, seed ^ 0x66ULL);
  out.data.phi = add_noise(config.data.phi, delta, seed ^ 0x70ULL);
  return out;
}

double HadamardProblem::value(const Point& p) const {
  const double k = n;
  return std::sin(k * p.x()) * std::sinh(k * p.y()) / (k * k);
}

Point HadamardProblem::gradient(const Point& p) const {
  const double k = n;
  return {std::cos(k * p.x()) * std::sinh(k * p.y()) / k,
          std::sin(k * p.x()) * std::cosh(k * p.y()) / k};
}

double HadamardProblem::neumann(const Point& p) const {
  const Point g = gradient(p);
  return std::abs(p.x()) < 1e-12 ? -g.x() : -g.y();
}

ProblemData HadamardProblem::data() const {
  const HadamardProblem self = *this;
  ProblemData d;
  d.q = [self](Index, const Point& x) { return self.value(x); };
  d.f = [](Index, const Point&) { return 0.0; };
  d.phi = [self](Index, const Point& x) { return self.neumann(x); };
  return d;
}

}  // namespace qrfem
