#pragma once

#include <array>
#include <vector>

namespace stabrb {

/// Quadrature on a triangle in barycentric coordinates. Weights sum to one,
/// so an integral over K is `area(K) * sum_q w_q f(x_q)`.
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree;

  std::size_t size() const { return weights.size(); }
};

/// Symmetric 7-point rule, exact for polynomials of degree 5.
const TriangleRule& triangle_rule_degree5();

/// Collapsed (Duffy) tensor Gauss rule with n x n points, exact to degree 2n-2.
TriangleRule collapsed_gauss_rule(int n);

/// Gauss-Legendre rule on [0, 1] with n points.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

LineRule gauss_legendre_unit(int n);

}  // namespace stabrb
