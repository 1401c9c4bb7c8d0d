#pragma once

#include <array>
#include <optional>
#include <vector>

namespace stabrb {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

enum class BoundaryTag { Lid, Wall };

/// Cell split: Forward = bottom-left to top-right, Backward = bottom-right to
/// top-left (the mirror image of Forward about the vertical midline).
enum class Diagonal { Forward, Backward };

struct InteriorEdge {
  std::array<int, 2> vertices;
  int left;   // triangle on the left of vertices[0] -> vertices[1]
  int right;
  double length;
};

struct BoundaryEdge {
  std::array<int, 2> vertices;
  int triangle;
  BoundaryTag tag;
};

/// Affine element data. `grad_lambda[i]` is the (constant) gradient of the
/// i-th barycentric coordinate.
struct ElementGeometry {
  double area;
  double diameter;
  std::array<Vec2, 3> grad_lambda;
};

/// Structured triangulation of the rectangle (0, length) x (0, height).
///
/// Every cell is split along the same diagonal (Forward by default). Edges are
/// numbered globally; `triangle_edges(k)` lists the edges opposite to the
/// local vertex pairs (0,1), (1,2), (2,0). The mesh is immutable once built.
class Mesh {
 public:
  Mesh(double length, double height, int nx, int ny, Diagonal diagonal = Diagonal::Forward);

  double length() const { return length_; }
  double height() const { return height_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Diagonal diagonal() const { return diagonal_; }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edge_vertices_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<InteriorEdge>& interior_edges() const { return interior_edges_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<double>& element_diameters() const { return diameters_; }

  const std::array<int, 3>& triangle_edges(int k) const { return triangle_edges_.at(k); }
  const std::array<int, 2>& edge_vertices(int e) const { return edge_vertices_.at(e); }
  bool edge_on_boundary(int e) const { return edge_boundary_.at(e); }

  ElementGeometry element_geometry(int k) const;

  /// Triangle containing `p` (closure), or nullopt when `p` is outside.
  std::optional<int> locate(Vec2 p) const;

  /// Barycentric coordinates of `p` with respect to triangle `k`.
  std::array<double, 3> barycentric(int k, Vec2 p) const;

  double area() const { return length_ * height_; }

 private:
  double length_;
  double height_;
  int nx_;
  int ny_;
  Diagonal diagonal_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 2>> edge_vertices_;
  std::vector<bool> edge_boundary_;
  std::vector<InteriorEdge> interior_edges_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<double> diameters_;
};

Mesh build_rect_mesh(double length, double height, int nx, int ny, Diagonal diagonal = Diagonal::Forward);

/// Geometry of an arbitrary triangle given by its three vertices.
ElementGeometry triangle_geometry(const std::array<Vec2, 3>& v);

}  // namespace stabrb
