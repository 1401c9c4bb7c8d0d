#include "stabrb/fespace.hpp"

#include <algorithm>
#include <string>

#include "stabrb/errors.hpp"

namespace stabrb {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::P0: return "P0";
    case Family::P1: return "P1";
    case Family::P2: return "P2";
  }
  return "?";
}

int local_node_count(Family family) {
  switch (family) {
    case Family::P0: return 1;
    case Family::P1: return 3;
    case Family::P2: return 6;
  }
  return 0;
}

ShapeValues evaluate_shape(Family family, const ElementGeometry& g,
                           const std::array<double, 3>& l) {
  ShapeValues s;
  const auto& gl = g.grad_lambda;
  switch (family) {
    case Family::P0:
      s.count = 1;
      s.value[0] = 1.0;
      break;
    case Family::P1:
      s.count = 3;
      for (int i = 0; i < 3; ++i) {
        s.value[i] = l[i];
        s.grad[i] = gl[i];
      }
      break;
    case Family::P2: {
      s.count = 6;
      for (int i = 0; i < 3; ++i) {
        s.value[i] = l[i] * (2.0 * l[i] - 1.0);
        s.grad[i] = (4.0 * l[i] - 1.0) * gl[i];
        s.dxx[i] = 4.0 * gl[i].x * gl[i].x;
        s.dyy[i] = 4.0 * gl[i].y * gl[i].y;
      }
      for (int e = 0; e < 3; ++e) {
        const int i = e, j = (e + 1) % 3;
        s.value[3 + e] = 4.0 * l[i] * l[j];
        s.grad[3 + e] = 4.0 * (l[j] * gl[i] + l[i] * gl[j]);
        s.dxx[3 + e] = 8.0 * gl[i].x * gl[j].x;
        s.dyy[3 + e] = 8.0 * gl[i].y * gl[j].y;
      }
      break;
    }
  }
  return s;
}

FunctionSpace::FunctionSpace(std::shared_ptr<const Mesh> mesh, Family family, int components)
    : mesh_(std::move(mesh)), family_(family), components_(components) {
  if (!mesh_) throw InvalidArgument("make_space: null mesh");
  if (components != 1 && components != 2) {
    throw InvalidArgument("make_space: components must be 1 or 2");
  }
  if (family == Family::P0 && components != 1) {
    throw Unsupported("make_space: P0 is only available as a scalar (pressure) space");
  }
  const Mesh& m = *mesh_;
  const int nloc = local_nodes();
  cell_nodes_.resize(static_cast<std::size_t>(m.n_triangles() * nloc));
  for (int k = 0; k < m.n_triangles(); ++k) {
    int* out = &cell_nodes_[static_cast<std::size_t>(k * nloc)];
    if (family == Family::P0) {
      out[0] = k;
      continue;
    }
    const auto& t = m.triangles()[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) out[i] = t[static_cast<std::size_t>(i)];
    if (family == Family::P2) {
      const auto& te = m.triangle_edges(k);
      for (int e = 0; e < 3; ++e) out[3 + e] = m.n_vertices() + te[static_cast<std::size_t>(e)];
    }
  }
  switch (family) {
    case Family::P0: n_nodes_ = m.n_triangles(); break;
    case Family::P1: n_nodes_ = m.n_vertices(); break;
    case Family::P2: n_nodes_ = m.n_vertices() + m.n_edges(); break;
  }

  lid_nodes_.assign(static_cast<std::size_t>(n_nodes_), false);
  wall_nodes_.assign(static_cast<std::size_t>(n_nodes_), false);
  if (family != Family::P0) {
    for (const BoundaryEdge& be : m.boundary_edges()) {
      auto& marks = be.tag == BoundaryTag::Lid ? lid_nodes_ : wall_nodes_;
      marks[static_cast<std::size_t>(be.vertices[0])] = true;
      marks[static_cast<std::size_t>(be.vertices[1])] = true;
    }
    if (family == Family::P2) {
      for (int e = 0; e < m.n_edges(); ++e) {
        if (!m.edge_on_boundary(e)) continue;
        const auto& ev = m.edge_vertices(e);
        const Vec2 a = m.vertices()[static_cast<std::size_t>(ev[0])];
        const Vec2 b = m.vertices()[static_cast<std::size_t>(ev[1])];
        const bool lid = a.y == m.height() && b.y == m.height();
        auto& marks = lid ? lid_nodes_ : wall_nodes_;
        marks[static_cast<std::size_t>(m.n_vertices() + e)] = true;
      }
    }
  }
  for (int n = 0; n < n_nodes_; ++n) {
    for (int c = 0; c < components_; ++c) {
      if (lid_nodes_[static_cast<std::size_t>(n)]) lid_dofs_.push_back(dof(n, c));
      if (wall_nodes_[static_cast<std::size_t>(n)]) wall_dofs_.push_back(dof(n, c));
      if (lid_nodes_[static_cast<std::size_t>(n)] || wall_nodes_[static_cast<std::size_t>(n)]) {
        dirichlet_dofs_.push_back(dof(n, c));
      }
    }
  }
}

std::span<const int> FunctionSpace::cell_nodes(int k) const {
  const int nloc = local_nodes();
  return {cell_nodes_.data() + static_cast<std::size_t>(k * nloc), static_cast<std::size_t>(nloc)};
}

Vec2 FunctionSpace::node_coordinates(int node) const {
  const Mesh& m = *mesh_;
  if (family_ == Family::P0) {
    const auto& t = m.triangles().at(static_cast<std::size_t>(node));
    Vec2 c{};
    for (int v : t) c = c + m.vertices()[static_cast<std::size_t>(v)];
    return (1.0 / 3.0) * c;
  }
  if (node < m.n_vertices()) return m.vertices().at(static_cast<std::size_t>(node));
  const auto& ev = m.edge_vertices(node - m.n_vertices());
  return 0.5 * (m.vertices()[static_cast<std::size_t>(ev[0])] +
                m.vertices()[static_cast<std::size_t>(ev[1])]);
}

const std::vector<int>& FunctionSpace::boundary_dofs(BoundaryTag tag) const {
  return tag == BoundaryTag::Lid ? lid_dofs_ : wall_dofs_;
}

bool FunctionSpace::node_on_tag(int node, BoundaryTag tag) const {
  const auto& marks = tag == BoundaryTag::Lid ? lid_nodes_ : wall_nodes_;
  return marks.at(static_cast<std::size_t>(node));
}

std::shared_ptr<const FunctionSpace> make_space(std::shared_ptr<const Mesh> mesh, Family family,
                                                int components) {
  return std::make_shared<const FunctionSpace>(std::move(mesh), family, components);
}

FeFunction::FeFunction(std::shared_ptr<const FunctionSpace> s)
    : space(std::move(s)), coefficients(Eigen::VectorXd::Zero(space->dof_count())) {}

FeFunction::FeFunction(std::shared_ptr<const FunctionSpace> s, Eigen::VectorXd c)
    : space(std::move(s)), coefficients(std::move(c)) {
  if (coefficients.size() != space->dof_count()) {
    throw InvalidArgument("FeFunction: coefficient length does not match the space");
  }
}

std::vector<double> eval_local(const FeFunction& f, int triangle,
                               const std::array<double, 3>& lambda) {
  const FunctionSpace& V = *f.space;
  const ShapeValues s = evaluate_shape(V.family(), V.mesh().element_geometry(triangle), lambda);
  const auto nodes = V.cell_nodes(triangle);
  std::vector<double> out(static_cast<std::size_t>(V.components()), 0.0);
  for (int a = 0; a < s.count; ++a) {
    for (int c = 0; c < V.components(); ++c) {
      out[static_cast<std::size_t>(c)] += s.value[a] * f.coefficients[V.dof(nodes[a], c)];
    }
  }
  return out;
}

std::vector<Vec2> eval_gradient_local(const FeFunction& f, int triangle,
                                      const std::array<double, 3>& lambda) {
  const FunctionSpace& V = *f.space;
  const ShapeValues s = evaluate_shape(V.family(), V.mesh().element_geometry(triangle), lambda);
  const auto nodes = V.cell_nodes(triangle);
  std::vector<Vec2> out(static_cast<std::size_t>(V.components()));
  for (int a = 0; a < s.count; ++a) {
    for (int c = 0; c < V.components(); ++c) {
      out[static_cast<std::size_t>(c)] =
          out[static_cast<std::size_t>(c)] + f.coefficients[V.dof(nodes[a], c)] * s.grad[a];
    }
  }
  return out;
}

namespace {

int locate_or_throw(const Mesh& m, Vec2 p) {
  const auto k = m.locate(p);
  if (!k) {
    throw NotFound("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                   ") lies outside the mesh");
  }
  return *k;
}

}  // namespace

std::vector<double> eval(const FeFunction& f, Vec2 point) {
  const int k = locate_or_throw(f.space->mesh(), point);
  return eval_local(f, k, f.space->mesh().barycentric(k, point));
}

std::vector<Vec2> eval_gradient(const FeFunction& f, Vec2 point) {
  const int k = locate_or_throw(f.space->mesh(), point);
  return eval_gradient_local(f, k, f.space->mesh().barycentric(k, point));
}

FeFunction interpolate(std::shared_ptr<const FunctionSpace> space, const VectorField& field) {
  FeFunction f(space);
  for (int n = 0; n < space->n_nodes(); ++n) {
    const auto v = field(space->node_coordinates(n));
    for (int c = 0; c < space->components(); ++c) {
      f.coefficients[space->dof(n, c)] = v[static_cast<std::size_t>(c)];
    }
  }
  return f;
}

FeFunction interpolate_lifting(std::shared_ptr<const FunctionSpace> space) {
  if (space->family() == Family::P0) {
    throw Unsupported("interpolate_lifting: P0 spaces carry no boundary values");
  }
  if (space->components() != 2) {
    throw InvalidArgument("interpolate_lifting: velocity space must have two components");
  }
  FeFunction l(space);
  for (int n = 0; n < space->n_nodes(); ++n) {
    if (space->node_on_tag(n, BoundaryTag::Lid) && !space->node_on_tag(n, BoundaryTag::Wall)) {
      l.coefficients[space->dof(n, 0)] = 1.0;
    }
  }
  return l;
}

}  // namespace stabrb
