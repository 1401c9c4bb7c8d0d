#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "stabrb/errors.hpp"
#include "stabrb/mesh.hpp"
#include "stabrb/quadrature.hpp"

using namespace stabrb;

namespace {

void check_invariants(const Mesh& m) {
  double total = 0.0;
  for (int k = 0; k < m.n_triangles(); ++k) {
    const auto g = m.element_geometry(k);
    EXPECT_GT(g.area, 0.0);
    total += g.area;
    // h_K is the longest edge, recomputed here from coordinates.
    const auto& t = m.triangles()[static_cast<std::size_t>(k)];
    double longest = 0.0;
    for (int l = 0; l < 3; ++l) {
      const Vec2 a = m.vertices()[static_cast<std::size_t>(t[static_cast<std::size_t>(l)])];
      const Vec2 b = m.vertices()[static_cast<std::size_t>(t[static_cast<std::size_t>((l + 1) % 3)])];
      longest = std::max(longest, std::hypot(a.x - b.x, a.y - b.y));
    }
    EXPECT_DOUBLE_EQ(m.element_diameters()[static_cast<std::size_t>(k)], longest);
  }
  EXPECT_NEAR(total, m.area(), 1e-12 * m.area());

  // Every edge: interior edges touch two triangles, boundary edges one.
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles())
    for (int l = 0; l < 3; ++l) {
      const auto key = std::minmax(t[static_cast<std::size_t>(l)], t[static_cast<std::size_t>((l + 1) % 3)]);
      ++count[{key.first, key.second}];
    }
  for (const auto& e : m.interior_edges()) {
    const auto key = std::minmax(e.vertices[0], e.vertices[1]);
    EXPECT_EQ((count[{key.first, key.second}]), 2);
  }
  for (const auto& e : m.boundary_edges()) {
    const auto key = std::minmax(e.vertices[0], e.vertices[1]);
    EXPECT_EQ((count[{key.first, key.second}]), 1);
  }
  EXPECT_EQ(m.interior_edges().size() + m.boundary_edges().size(), count.size());
}

}  // namespace

TEST(Mesh, SingleCell) {
  const Mesh m = build_rect_mesh(1, 1, 1, 1);
  EXPECT_EQ(m.n_vertices(), 4);
  EXPECT_EQ(m.n_triangles(), 2);
  ASSERT_EQ(m.interior_edges().size(), 1u);
  EXPECT_NEAR(m.interior_edges()[0].length, std::sqrt(2.0), 1e-15);
  check_invariants(m);
}

TEST(Mesh, TwoCells) {
  const Mesh m = build_rect_mesh(2, 1, 2, 1);
  EXPECT_EQ(m.n_vertices(), 6);
  EXPECT_EQ(m.n_triangles(), 4);
  double area = 0.0;
  for (int k = 0; k < m.n_triangles(); ++k) area += m.element_geometry(k).area;
  EXPECT_EQ(area, 2.0);
  check_invariants(m);
}

TEST(Mesh, DeskScaleCountsAndLid) {
  const Mesh m = build_rect_mesh(2, 1, 32, 16);
  EXPECT_EQ(m.n_vertices(), 33 * 17);
  EXPECT_EQ(m.n_triangles(), 2 * 32 * 16);
  int lid = 0;
  for (const auto& e : m.boundary_edges()) {
    const Vec2 a = m.vertices()[static_cast<std::size_t>(e.vertices[0])];
    const Vec2 b = m.vertices()[static_cast<std::size_t>(e.vertices[1])];
    const bool top = a.y == 1.0 && b.y == 1.0;
    EXPECT_EQ(e.tag == BoundaryTag::Lid, top);
    lid += top;
  }
  EXPECT_EQ(lid, 32);
  EXPECT_EQ(m.boundary_edges().size(), 2u * (32 + 16));
  check_invariants(m);
}

TEST(Mesh, BackwardDiagonalIsMirrorImage) {
  const Mesh f = build_rect_mesh(2, 1, 4, 3, Diagonal::Forward);
  const Mesh b = build_rect_mesh(2, 1, 4, 3, Diagonal::Backward);
  check_invariants(b);
  // The mirror x -> L - x maps each forward triangle onto a backward one.
  std::map<std::array<int, 3>, int> tris;
  const auto mirror = [&](int v) {
    const int i = v % 5, j = v / 5;
    return j * 5 + (4 - i);
  };
  for (const auto& t : b.triangles()) {
    std::array<int, 3> s = t;
    std::sort(s.begin(), s.end());
    ++tris[s];
  }
  for (const auto& t : f.triangles()) {
    std::array<int, 3> s{mirror(t[0]), mirror(t[1]), mirror(t[2])};
    std::sort(s.begin(), s.end());
    EXPECT_EQ(tris[s], 1);
  }
}

TEST(Mesh, InvalidArguments) {
  EXPECT_THROW(build_rect_mesh(0, 1, 1, 1), InvalidArgument);
  EXPECT_THROW(build_rect_mesh(1, -1, 1, 1), InvalidArgument);
  EXPECT_THROW(build_rect_mesh(1, 1, 0, 1), InvalidArgument);
}

TEST(ElementGeometry, UnitRightTriangle) {
  const auto g = triangle_geometry({Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}});
  EXPECT_DOUBLE_EQ(g.area, 0.5);
  EXPECT_DOUBLE_EQ(g.diameter, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(g.grad_lambda[0].x, -1.0);
  EXPECT_DOUBLE_EQ(g.grad_lambda[0].y, -1.0);
  EXPECT_DOUBLE_EQ(g.grad_lambda[1].x, 1.0);
  EXPECT_DOUBLE_EQ(g.grad_lambda[1].y, 0.0);
  EXPECT_DOUBLE_EQ(g.grad_lambda[2].x, 0.0);
  EXPECT_DOUBLE_EQ(g.grad_lambda[2].y, 1.0);
}

TEST(ElementGeometry, GradientsSumToZero) {
  const Mesh m = build_rect_mesh(2.7, 1.3, 5, 4);
  for (int k = 0; k < m.n_triangles(); ++k) {
    const auto g = m.element_geometry(k);
    EXPECT_NEAR(g.grad_lambda[0].x + g.grad_lambda[1].x + g.grad_lambda[2].x, 0.0, 1e-12);
    EXPECT_NEAR(g.grad_lambda[0].y + g.grad_lambda[1].y + g.grad_lambda[2].y, 0.0, 1e-12);
  }
  const auto g = triangle_geometry({Vec2{0.3, -1.2}, Vec2{2.0, 0.7}, Vec2{-0.4, 1.9}});
  EXPECT_NEAR(g.grad_lambda[0].x + g.grad_lambda[1].x + g.grad_lambda[2].x, 0.0, 1e-14);
  EXPECT_NEAR(g.grad_lambda[0].y + g.grad_lambda[1].y + g.grad_lambda[2].y, 0.0, 1e-14);
}

TEST(Mesh, LocateAndBarycentric) {
  for (Diagonal d : {Diagonal::Forward, Diagonal::Backward}) {
    const Mesh m = build_rect_mesh(2, 1, 7, 5, d);
    for (Vec2 p : {Vec2{0.13, 0.77}, Vec2{1.99, 0.01}, Vec2{0.0, 0.0}, Vec2{2.0, 1.0}, Vec2{1.0, 0.5}}) {
      const auto k = m.locate(p);
      ASSERT_TRUE(k.has_value());
      const auto l = m.barycentric(*k, p);
      for (double v : l) EXPECT_GE(v, -1e-12);
      EXPECT_NEAR(l[0] + l[1] + l[2], 1.0, 1e-14);
    }
    EXPECT_FALSE(m.locate({2.5, 0.5}).has_value());
  }
}

TEST(Quadrature, Degree5Exactness) {
  // Monomials x^i y^j on the unit triangle: i! j! / (i + j + 2)!.
  const auto fact = [](int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  for (const TriangleRule& rule : {triangle_rule_degree5(), collapsed_gauss_rule(5)}) {
    double wsum = 0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int i = 0; i <= 5; ++i)
      for (int j = 0; i + j <= 5; ++j) {
        double q = 0.0;
        for (std::size_t p = 0; p < rule.size(); ++p) {
          const double x = rule.points[p][1], y = rule.points[p][2];
          q += 0.5 * rule.weights[p] * std::pow(x, i) * std::pow(y, j);
        }
        EXPECT_NEAR(q, fact(i) * fact(j) / fact(i + j + 2), 1e-14) << i << "," << j;
      }
  }
}
