// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <vector>

namespace qrfem {

inline constexpr int max_quadrature_order = 10;

/// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
/// Points are barycentric (lambda0, lambda1, lambda2) with x = lambda1,
/// y = lambda2; weights sum to 1/2.
struct TriangleRule {
  int order = 0;
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;
};

/// Quadrature on [0,1]; weights sum to 1.
struct EdgeRule {
  int order = 0;
  std::vector<double> points;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [0,1] (exact to degree 2n-1).
[[nodiscard]] EdgeRule gauss_legendre(int n);

/// Smallest Gauss-Legendre rule exact to `order`. Throws for order > 10.
[[nodiscard]] EdgeRule edge_rule(int order);

/// Collapsed (Duffy) Gauss product rule exact for total degree <= `order`;
/// all weights positive. Throws for order > 10.
[[nodiscard]] TriangleRule triangle_rule(int order);

/// Cached copies of the rules above, for hot assembly loops.
[[nodiscard]] const TriangleRule& cached_triangle_rule(int order);
[[nodiscard]] const EdgeRule& cached_edge_rule(int order);

}  // namespace qrfem
