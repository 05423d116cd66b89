// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qrfem/schemes.hpp"

#include <optional>
#include <span>
#include <string>

namespace qrfem {

enum class NormRegion { Omega, G };
enum class NormKind { L2, H1 };

/// Quadrature order used for errors against non-polynomial exact solutions.
inline constexpr int error_quadrature_order = 10;

struct ExactSolution {
  ScalarFunction value;
  VectorFunction gradient;
};

[[nodiscard]] ExactSolution exact_solution(const HadamardProblem& problem);

/// ||u_h - u|| over Omega or the cells tagged InteriorG.
[[nodiscard]] double error_norm(const FeFunction& uh, const ExactSolution& exact,
                                NormRegion region, NormKind norm);

/// sqrt(J_h(v, v)).
[[nodiscard]] double jump_seminorm(const FeFunction& v);

/// |||(v, w)||| of the scheme `system` was built with.
[[nodiscard]] double triple_norm(const FeFunction& v, const FeFunction& w,
                                 const DiscreteSystem& system);

/// ||grad z_h|| with z_h in Lagrange(degree) vanishing on the boundary and
/// (grad z_h, grad w) = (g, w) for all w.
[[nodiscard]] double discrete_hminus1(std::shared_ptr<const TriangleMesh> mesh,
                                      const EntityFunction& g, int degree);

/// Same, with the residual functional w -> a_h(u, w) - (f, w) as right-hand side,
/// on a test space one degree above u.
[[nodiscard]] double discrete_hminus1_residual(const FeFunction& u, const EntityFunction& f);

/// Riesz representer norm of w -> a(v, w) over Lagrange(deg v + 1) vanishing on Gamma1,
/// measured in H1.
[[nodiscard]] double discrete_cp_dual_norm(const FeFunction& v);
[[nodiscard]] double discrete_cp_dual_norm(const FeFunction& v, int test_degree);

/// Least-squares slope of log(error) against log(h). Needs >= 3 positive points.
[[nodiscard]] double fit_rate(std::span<const double> h, std::span<const double> errors);

/// Norms of one solve, serialized as one CSV row.
struct ErrorReport {
  double h = 0.0;
  std::size_t dofs_primal = 0;
  std::size_t dofs_dual = 0;
  std::optional<double> epsilon;
  double gamma = 0.0;
  std::optional<int> n;
  std::optional<double> delta;
  std::optional<double> l2_omega, h1_omega, l2_g, h1_g, jump, triple;
  std::optional<double> kappa2;
  std::optional<double> sigma_min;
};

inline constexpr const char* csv_header =
    "h,dofs_primal,dofs_dual,epsilon,gamma,n,delta,l2_omega,h1_omega,l2_g,h1_g,jump,triple,kappa2,"
    "sigma_min";

[[nodiscard]] std::string to_csv_row(const ErrorReport& report);

/// Fills the error columns of a report for the solution of `system` against `exact`.
[[nodiscard]] ErrorReport make_report(const DiscreteSystem& system, const Solution& solution,
                                      const ExactSolution& exact);

}  // namespace qrfem
