#include "stabrb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "stabrb/errors.hpp"

namespace stabrb {

namespace {

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

ElementGeometry triangle_geometry(const std::array<Vec2, 3>& v) {
  const double twice_area =
      (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
  ElementGeometry g;
  g.area = 0.5 * twice_area;
  g.diameter = std::max({distance(v[0], v[1]), distance(v[1], v[2]), distance(v[2], v[0])});
  g.grad_lambda[0] = {(v[1].y - v[2].y) / twice_area, (v[2].x - v[1].x) / twice_area};
  g.grad_lambda[1] = {(v[2].y - v[0].y) / twice_area, (v[0].x - v[2].x) / twice_area};
  g.grad_lambda[2] = {(v[0].y - v[1].y) / twice_area, (v[1].x - v[0].x) / twice_area};
  return g;
}

Mesh::Mesh(double length, double height, int nx, int ny, Diagonal diagonal)
    : length_(length), height_(height), nx_(nx), ny_(ny), diagonal_(diagonal) {
  if (!(length > 0.0) || !(height > 0.0)) {
    throw InvalidArgument("build_rect_mesh: length and height must be positive");
  }
  if (nx < 1 || ny < 1) {
    throw InvalidArgument("build_rect_mesh: nx and ny must be >= 1");
  }

  vertices_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    // Exact end points so that boundary classification needs no tolerance.
    const double y = (j == ny) ? height : height * static_cast<double>(j) / ny;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? length : length * static_cast<double>(i) / nx;
      vertices_.push_back({x, y});
    }
  }

  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  triangles_.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if (diagonal == Diagonal::Forward) {
        triangles_.push_back({v00, v10, v11});
        triangles_.push_back({v00, v11, v01});
      } else {
        triangles_.push_back({v00, v10, v01});
        triangles_.push_back({v10, v11, v01});
      }
    }
  }

  std::map<std::pair<int, int>, int> edge_index;
  std::vector<std::array<int, 2>> edge_triangles;
  triangle_edges_.resize(triangles_.size());
  for (int k = 0; k < n_triangles(); ++k) {
    const auto& t = triangles_[static_cast<std::size_t>(k)];
    for (int l = 0; l < 3; ++l) {
      const int a = t[static_cast<std::size_t>(l)];
      const int b = t[static_cast<std::size_t>((l + 1) % 3)];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, n_edges());
      if (inserted) {
        edge_vertices_.push_back({a, b});
        edge_triangles.push_back({k, -1});
      } else {
        edge_triangles[static_cast<std::size_t>(it->second)][1] = k;
      }
      triangle_edges_[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = it->second;
    }
  }

  edge_boundary_.resize(edge_vertices_.size());
  for (int e = 0; e < n_edges(); ++e) {
    const auto& ev = edge_vertices_[static_cast<std::size_t>(e)];
    const auto& et = edge_triangles[static_cast<std::size_t>(e)];
    const Vec2 a = vertices_[static_cast<std::size_t>(ev[0])];
    const Vec2 b = vertices_[static_cast<std::size_t>(ev[1])];
    if (et[1] >= 0) {
      edge_boundary_[static_cast<std::size_t>(e)] = false;
      interior_edges_.push_back({ev, et[0], et[1], distance(a, b)});
    } else {
      edge_boundary_[static_cast<std::size_t>(e)] = true;
      const bool lid = a.y == height && b.y == height;
      boundary_edges_.push_back({ev, et[0], lid ? BoundaryTag::Lid : BoundaryTag::Wall});
    }
  }

  diameters_.reserve(triangles_.size());
  for (int k = 0; k < n_triangles(); ++k) {
    diameters_.push_back(element_geometry(k).diameter);
  }
}

ElementGeometry Mesh::element_geometry(int k) const {
  if (k < 0 || k >= n_triangles()) {
    throw InvalidArgument("element_geometry: triangle index " + std::to_string(k) +
                          " out of range");
  }
  const auto& t = triangles_[static_cast<std::size_t>(k)];
  return triangle_geometry({vertices_[static_cast<std::size_t>(t[0])],
                            vertices_[static_cast<std::size_t>(t[1])],
                            vertices_[static_cast<std::size_t>(t[2])]});
}

std::optional<int> Mesh::locate(Vec2 p) const {
  const double tol = 1e-12 * std::max(length_, height_);
  if (p.x < -tol || p.x > length_ + tol || p.y < -tol || p.y > height_ + tol) {
    return std::nullopt;
  }
  const double hx = length_ / nx_;
  const double hy = height_ / ny_;
  const int i = std::clamp(static_cast<int>(std::floor(p.x / hx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(p.y / hy)), 0, ny_ - 1);
  const double s = p.x / hx - i;
  const double t = p.y / hy - j;
  const int cell = j * nx_ + i;
  if (diagonal_ == Diagonal::Forward) return t <= s ? 2 * cell : 2 * cell + 1;
  return s + t <= 1.0 ? 2 * cell : 2 * cell + 1;
}

std::array<double, 3> Mesh::barycentric(int k, Vec2 p) const {
  const ElementGeometry g = element_geometry(k);
  const Vec2 v0 = vertices_[static_cast<std::size_t>(triangles_[static_cast<std::size_t>(k)][0])];
  const Vec2 d = p - v0;
  const double l1 = g.grad_lambda[1].x * d.x + g.grad_lambda[1].y * d.y;
  const double l2 = g.grad_lambda[2].x * d.x + g.grad_lambda[2].y * d.y;
  return {1.0 - l1 - l2, l1, l2};
}

Mesh build_rect_mesh(double length, double height, int nx, int ny, Diagonal diagonal) {
  return Mesh(length, height, nx, ny, diagonal);
}

}  // namespace stabrb
