// SPDX-License-Identifier: Apache-2.0
#include "qrfem/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

namespace qrfem {

namespace {

void check_order(int order) {
  if (order < 0 || order > max_quadrature_order) {
    throw std::invalid_argument("quadrature order must lie in [0, 10], got " +
                                std::to_string(order));
  }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

EdgeRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
  EdgeRule rule;
  rule.order = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n over [-1,1], then map to [0,1].
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    auto [pn, dpn] = legendre(n, x);
    for (int iter = 0; iter < 100; ++iter) {
      const double dx = pn / dpn;
      x -= dx;
      std::tie(pn, dpn) = legendre(n, x);
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

EdgeRule edge_rule(int order) {
  check_order(order);
  const int n = order / 2 + 1;
  EdgeRule rule = gauss_legendre(n);
  rule.order = order;
  return rule;
}

TriangleRule triangle_rule(int order) {
  check_order(order);
  // x = s, y = (1 - s) t; the Jacobian (1 - s) raises the degree in s by one.
  const EdgeRule rs = gauss_legendre((order + 1) / 2 + 1);
  const EdgeRule rt = gauss_legendre(order / 2 + 1);
  TriangleRule rule;
  rule.order = order;
  for (std::size_t i = 0; i < rs.points.size(); ++i) {
    const double s = rs.points[i];
    for (std::size_t j = 0; j < rt.points.size(); ++j) {
      const double x = s;
      const double y = (1.0 - s) * rt.points[j];
      rule.points.emplace_back(1.0 - x - y, x, y);
      rule.weights.push_back(rs.weights[i] * rt.weights[j] * (1.0 - s));
    }
  }
  return rule;
}

const TriangleRule& cached_triangle_rule(int order) {
  static const auto rules = [] {
    std::array<TriangleRule, max_quadrature_order + 1> r;
    for (int k = 0; k <= max_quadrature_order; ++k) r[k] = triangle_rule(k);
    return r;
  }();
  check_order(order);
  return rules[order];
}

const EdgeRule& cached_edge_rule(int order) {
  static const auto rules = [] {
    std::array<EdgeRule, max_quadrature_order + 1> r;
    for (int k = 0; k <= max_quadrature_order; ++k) r[k] = edge_rule(k);
    return r;
  }();
  check_order(order);
  return rules[order];
}

}  // namespace qrfem
