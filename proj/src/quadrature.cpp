#include "stabrb/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "stabrb/errors.hpp"

namespace stabrb {

const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0, w2 = (155.0 + s15) / 1200.0;
    TriangleRule r;
    r.degree = 5;
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                {a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1},
                {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}};
    r.weights = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

LineRule gauss_legendre_unit(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre_unit: n must be >= 1");
  LineRule r;
  r.points.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.points[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    r.weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

TriangleRule collapsed_gauss_rule(int n) {
  const LineRule g = gauss_legendre_unit(n);
  TriangleRule r;
  r.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = g.points[static_cast<std::size_t>(i)];
      const double eta = g.points[static_cast<std::size_t>(j)];
      // (xi, eta) in the unit square -> (s, t) = (xi, eta (1 - xi)) in the unit triangle.
      const double s = xi;
      const double t = eta * (1.0 - xi);
      r.points.push_back({1.0 - s - t, s, t});
      // Reference triangle area is 1/2; weights are normalised to sum to one.
      r.weights.push_back(2.0 * g.weights[static_cast<std::size_t>(i)] *
                          g.weights[static_cast<std::size_t>(j)] * (1.0 - xi));
    }
  }
  return r;
}

}  // namespace stabrb
