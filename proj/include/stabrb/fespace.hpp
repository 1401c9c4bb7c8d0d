#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "stabrb/mesh.hpp"

namespace stabrb {

enum class Family { P0, P1, P2 };

std::string_view to_string(Family f);

/// Values and derivatives of the local scalar basis at one point of a
/// triangle. Local node order: vertices, then the edges (0,1), (1,2), (2,0).
struct ShapeValues {
  int count = 0;
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};
  std::array<double, 6> dxx{};
  std::array<double, 6> dyy{};
};

ShapeValues evaluate_shape(Family family, const ElementGeometry& geometry,
                           const std::array<double, 3>& lambda);

int local_node_count(Family family);

/// Lagrange space on a `Mesh`. Vector spaces interleave components:
/// dof = components * node + component.
class FunctionSpace {
 public:
  FunctionSpace(std::shared_ptr<const Mesh> mesh, Family family, int components);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  Family family() const { return family_; }
  int components() const { return components_; }
  int n_nodes() const { return n_nodes_; }
  int dof_count() const { return n_nodes_ * components_; }
  int local_nodes() const { return local_node_count(family_); }

  std::span<const int> cell_nodes(int k) const;
  int dof(int node, int component) const { return components_ * node + component; }

  Vec2 node_coordinates(int node) const;

  /// Dofs (all components) of the nodes lying on the given boundary part.
  /// Corner vertices of the lid belong to both parts. Empty for P0.
  const std::vector<int>& boundary_dofs(BoundaryTag tag) const;

  /// Sorted union of all boundary dofs.
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }

  bool node_on_tag(int node, BoundaryTag tag) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  Family family_;
  int components_;
  int n_nodes_;
  std::vector<int> cell_nodes_;
  std::vector<bool> lid_nodes_;
  std::vector<bool> wall_nodes_;
  std::vector<int> lid_dofs_;
  std::vector<int> wall_dofs_;
  std::vector<int> dirichlet_dofs_;
};

std::shared_ptr<const FunctionSpace> make_space(std::shared_ptr<const Mesh> mesh, Family family,
                                                int components);

struct FeFunction {
  std::shared_ptr<const FunctionSpace> space;
  Eigen::VectorXd coefficients;

  FeFunction() = default;
  explicit FeFunction(std::shared_ptr<const FunctionSpace> s);
  FeFunction(std::shared_ptr<const FunctionSpace> s, Eigen::VectorXd c);
};

/// Point values, one entry per component. Throws `NotFound` outside the mesh.
std::vector<double> eval(const FeFunction& f, Vec2 point);
std::vector<Vec2> eval_gradient(const FeFunction& f, Vec2 point);

/// Values inside a known triangle at barycentric coordinates.
std::vector<double> eval_local(const FeFunction& f, int triangle, const std::array<double, 3>& lambda);
std::vector<Vec2> eval_gradient_local(const FeFunction& f, int triangle,
                                      const std::array<double, 3>& lambda);

using VectorField = std::function<std::array<double, 2>(Vec2)>;

/// Nodal interpolant (P0: value at the centroid).
FeFunction interpolate(std::shared_ptr<const FunctionSpace> space, const VectorField& field);

/// Lifting of the lid data: horizontal velocity 1 on lid nodes, 0 elsewhere;
/// the two lid corners belong to the walls and get 0.
FeFunction interpolate_lifting(std::shared_ptr<const FunctionSpace> space);

}  // namespace stabrb
