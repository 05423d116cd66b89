// SPDX-License-Identifier: Apache-2.0
#include "qrfem/analysis.hpp"

#include "qrfem/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qrfem {

namespace {

/// sum over accepted cells of int_K integrand(cell, bary, x) dx.
template <typename Filter, typename Integrand>
double integrate_cells(const TriangleMesh& mesh, int order, Filter use_cell,
                       Integrand integrand) {
  const TriangleRule& rule = cached_triangle_rule(order);
  double total = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    if (!use_cell(c)) continue;
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      local += rule.weights[q] * integrand(c, rule.points[q]);
    }
    total += 2.0 * mesh.area(c) * local;
  }
  return total;
}

Eigen::Vector3d facet_bary(const TriangleMesh& mesh, const Facet& f, Index cell, double t) {
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();
  const auto& verts = mesh.cell(cell);
  for (int j = 0; j < 3; ++j) {
    if (verts[j] == f.vertices[0]) bary[j] = 1.0 - t;
    if (verts[j] == f.vertices[1]) bary[j] = t;
  }
  return bary;
}

/// sum over accepted facets of h_F int_F integrand(facet, t) dS.
template <typename Filter, typename Integrand>
double integrate_facets_weighted(const TriangleMesh& mesh, int order, Filter use_facet,
                                 Integrand integrand) {
  const EdgeRule& rule = cached_edge_rule(order);
  double total = 0.0;
  for (const Facet& f : mesh.facets()) {
    if (!use_facet(f)) continue;
    double local = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      local += rule.weights[q] * integrand(f, rule.points[q]);
    }
    total += f.length * f.length * local;
  }
  return total;
}

double jump_squared(const FeFunction& v) {
  const TriangleMesh& mesh = v.space().mesh();
  const int order = 2 * std::max(0, v.space().type().degree - 1);
  return integrate_facets_weighted(
      mesh, order, [](const Facet& f) { return !f.is_boundary(); },
      [&](const Facet& f, double t) {
        const Point g0 = v.gradient(f.cells[0], facet_bary(mesh, f, f.cells[0], t));
        const Point g1 = v.gradient(f.cells[1], facet_bary(mesh, f, f.cells[1], t));
        const double jump = f.normal.dot(g0 - g1);
        return jump * jump;
      });
}

double h1_squared(const FeFunction& v, bool scaled_by_h2) {
  const TriangleMesh& mesh = v.space().mesh();
  const int order = 2 * v.space().type().degree;
  return integrate_cells(mesh, order, [](Index) { return true; },
                         [&](Index c, const Eigen::Vector3d& b) {
                           const double val = v.value(c, b);
                           const double w = scaled_by_h2 ? mesh.diameter(c) * mesh.diameter(c)
                                                         : 1.0;
                           return w * (val * val + v.gradient(c, b).squaredNorm());
                         });
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", *v);
  return buf;
}

}  // namespace

ExactSolution exact_solution(const HadamardProblem& problem) {
  return {[problem](const Point& p) { return problem.value(p); },
          [problem](const Point& p) { return problem.gradient(p); }};
}

double error_norm(const FeFunction& uh, const ExactSolution& exact, NormRegion region,
                  NormKind norm) {
  const TriangleMesh& mesh = uh.space().mesh();
  if (region == NormRegion::G && mesh.count_region(Region::InteriorG) == 0) {
    throw std::invalid_argument("error_norm: no cells tagged with the region G");
  }
  const double total = integrate_cells(
      mesh, error_quadrature_order,
      [&](Index c) { return region == NormRegion::Omega || mesh.has_region(c, Region::InteriorG); },
      [&](Index c, const Eigen::Vector3d& b) {
        const Point x = mesh.map_to_physical(c, b);
        const double e = uh.value(c, b) - exact.value(x);
        double s = e * e;
        if (norm == NormKind::H1) s += (uh.gradient(c, b) - exact.gradient(x)).squaredNorm();
        return s;
      });
  return std::sqrt(total);
}

double jump_seminorm(const FeFunction& v) { return std::sqrt(jump_squared(v)); }

double triple_norm(const FeFunction& v, const FeFunction& w, const DiscreteSystem& system) {
  if (v.space_ptr() != system.primal || w.space_ptr() != system.dual) {
    throw std::invalid_argument("triple_norm: functions are not on the scheme's spaces");
  }
  const SchemeConfig& config = system.config;
  const TriangleMesh& mesh = v.space().mesh();
  const int k = v.space().type().degree;
  double sum = config.variant == Variant::Unregularized ? h1_squared(v, true)
                                                        : config.epsilon * h1_squared(v, false);
  if (config.problem == Problem::UniqueContinuation) {
    sum += integrate_cells(
        mesh, 2 * k, [&](Index c) { return mesh.has_region(c, Region::OmegaData); },
        [&](Index c, const Eigen::Vector3d& b) {
          const double val = v.value(c, b);
          return val * val;
        });
  } else {
    sum += integrate_facets_weighted(
        mesh, 2 * std::max(0, k - 1),
        [](const Facet& f) { return f.is_boundary() && f.tag == BoundaryPart::Gamma0; },
        [&](const Facet& f, double t) {
          const double dn = v.gradient(f.cells[0], facet_bary(mesh, f, f.cells[0], t)).dot(f.normal);
          return dn * dn;
        });
  }
  sum += jump_squared(v);
  sum += integrate_cells(mesh, 2 * std::max(0, k - 2), [](Index) { return true; },
                         [&](Index c, const Eigen::Vector3d& b) {
                           const double lap = mesh.diameter(c) * v.laplacian(c, b);
                           return lap * lap;
                         });
  sum += config.gamma * config.gamma * h1_squared(w, false);
  return std::sqrt(sum);
}

double discrete_hminus1(std::shared_ptr<const TriangleMesh> mesh, const EntityFunction& g,
                        int degree) {
  const SpacePtr space =
      build_space(std::move(mesh), ElementType::lagrange(degree), Constraint::ZeroOnBoundary);
  const SparseMatrix k = assemble_form(FormKind::BrokenStiffness, *space, *space);
  const Eigen::VectorXd b = assemble_rhs(RhsKind::Source, *space, g);
  const Eigen::VectorXd z = solve_spd(k, b);
  return std::sqrt(std::max(0.0, z.dot(k * z)));
}

double discrete_hminus1_residual(const FeFunction& u, const EntityFunction& f) {
  const int degree = std::min(4, u.space().type().degree + 1);
  const SpacePtr space = build_space(u.space().mesh_ptr(), ElementType::lagrange(degree),
                                     Constraint::ZeroOnBoundary);
  const SparseMatrix k = assemble_form(FormKind::BrokenStiffness, *space, *space);
  Eigen::VectorXd b = apply_stiffness(u, *space);
  if (f) b -= assemble_rhs(RhsKind::Source, *space, f);
  const Eigen::VectorXd z = solve_spd(k, b);
  return std::sqrt(std::max(0.0, z.dot(k * z)));
}

double discrete_cp_dual_norm(const FeFunction& v, int test_degree) {
  if (!v.space().conforming()) {
    throw std::invalid_argument("cp dual norm needs a conforming function");
  }
  const SpacePtr space = build_space(v.space().mesh_ptr(), ElementType::lagrange(test_degree),
                                     Constraint::ZeroOnGamma1);
  const SparseMatrix gram = assemble_form(FormKind::BrokenH1, *space, *space);
  const Eigen::VectorXd b = apply_stiffness(v, *space);
  const Eigen::VectorXd z = solve_spd(gram, b);
  return std::sqrt(std::max(0.0, z.dot(gram * z)));
}

double discrete_cp_dual_norm(const FeFunction& v) {
  return discrete_cp_dual_norm(v, std::min(4, v.space().type().degree + 1));
}

double fit_rate(std::span<const double> h, std::span<const double> errors) {
  if (h.size() != errors.size() || h.size() < 3) {
    throw std::invalid_argument("fit_rate needs at least 3 matching data points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(errors[i] > 0.0)) {
      throw std::invalid_argument("fit_rate needs positive data");
    }
    const double x = std::log(h[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(h.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("fit_rate needs distinct mesh sizes");
  return (n * sxy - sx * sy) / denom;
}

std::string to_csv_row(const ErrorReport& r) {
  std::string row = format_optional(r.h);
  row += ',' + std::to_string(r.dofs_primal);
  row += ',' + std::to_string(r.dofs_dual);
  row += ',' + format_optional(r.epsilon);
  row += ',' + format_optional(r.gamma);
  row += ',' + (r.n ? std::to_string(*r.n) : std::string());
  for (const auto* v : {&r.delta, &r.l2_omega, &r.h1_omega, &r.l2_g, &r.h1_g, &r.jump, &r.triple,
                        &r.kappa2, &r.sigma_min}) {
    row += ',' + format_optional(*v);
  }
  return row;
}

ErrorReport make_report(const DiscreteSystem& system, const Solution& solution,
                        const ExactSolution& exact) {
  const TriangleMesh& mesh = system.primal->mesh();
  ErrorReport r;
  r.h = mesh.h();
  r.dofs_primal = system.primal->dimension();
  r.dofs_dual = system.dual->dimension();
  if (system.config.variant != Variant::Unregularized) r.epsilon = system.config.epsilon;
  r.gamma = system.config.gamma;
  r.l2_omega = error_norm(solution.u, exact, NormRegion::Omega, NormKind::L2);
  r.h1_omega = error_norm(solution.u, exact, NormRegion::Omega, NormKind::H1);
  if (mesh.count_region(Region::InteriorG) > 0) {
    r.l2_g = error_norm(solution.u, exact, NormRegion::G, NormKind::L2);
    r.h1_g = error_norm(solution.u, exact, NormRegion::G, NormKind::H1);
  }
  r.jump = jump_seminorm(solution.u);
  FeFunction e = solution.u;
  e.coefficients() -= interpolate_nodal(system.primal, exact.value).coefficients();
  r.triple = triple_norm(e, solution.lambda, system);
  return r;
}

}  // namespace qrfem
