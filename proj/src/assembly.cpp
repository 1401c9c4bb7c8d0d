#include "stabrb/assembly.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "stabrb/errors.hpp"
#include "stabrb/quadrature.hpp"

namespace stabrb {

std::string_view to_string(Problem p) {
  return p == Problem::Stokes ? "stokes" : "navier-stokes";
}

Problem problem_from_string(std::string_view s) {
  if (s == to_string(Problem::Stokes)) return Problem::Stokes;
  if (s == to_string(Problem::NavierStokes)) return Problem::NavierStokes;
  throw InvalidArgument("unknown problem '" + std::string(s) + "'");
}

double viscosity(Problem problem, Parameter mu) {
  if (problem == Problem::Stokes) return mu.mu1;
  if (mu.mu1 <= 0.0) throw InvalidArgument("viscosity: Reynolds number must be positive");
  return 1.0 / mu.mu1;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::None: return "none";
    case Method::BrezziPitkaranta: return "brezzi-pitkaranta";
    case Method::ResidualBased: return "residual";
    case Method::SupgFamily: return "supg";
    case Method::EdgeJumpP1P0: return "edge-jump";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::None, Method::BrezziPitkaranta, Method::ResidualBased,
                   Method::SupgFamily, Method::EdgeJumpP1P0}) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown stabilization method '" + std::string(s) + "'");
}

void StabilizationConfig::validate(std::optional<Family> pressure) const {
  if (!(delta >= 0.0)) throw InvalidArgument("stabilization: delta must satisfy delta >= 0");
  if (rho < -1 || rho > 1) throw InvalidArgument("stabilization: rho must be -1, 0 or 1");
  if (pressure && method == Method::EdgeJumpP1P0 && *pressure != Family::P0) {
    throw InvalidArgument("stabilization: the edge jump needs a P0 pressure");
  }
}

namespace {

constexpr int kMaxLocal = 12;

struct LocalMatrix {
  std::array<double, kMaxLocal * kMaxLocal> v{};
  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r * kMaxLocal + c)]; }
  double operator()(int r, int c) const { return v[static_cast<std::size_t>(r * kMaxLocal + c)]; }
};

struct QuadData {
  double weight;  // area * w_q
  const ShapeValues& test;
  const ShapeValues& trial;
  Vec2 x;
  double h;
};

/// Loop over elements and quadrature points; `kernel(L, qd)` accumulates into
/// the local matrix indexed by (a * test_comps + c, b * trial_comps + d).
template <class Kernel>
SparseMatrix assemble_matrix(const FunctionSpace& test, const FunctionSpace& trial, Kernel&& kernel) {
  const Mesh& mesh = test.mesh();
  const TriangleRule& rule = triangle_rule_degree5();
  const int nt = test.local_nodes() * test.components();
  const int nr = trial.local_nodes() * trial.components();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_triangles() * nt * nr));
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const ElementGeometry g = mesh.element_geometry(k);
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(k)];
    LocalMatrix L;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.points[q];
      const ShapeValues st = evaluate_shape(test.family(), g, lam);
      const ShapeValues sr = evaluate_shape(trial.family(), g, lam);
      Vec2 x{};
      for (int i = 0; i < 3; ++i) x = x + lam[static_cast<std::size_t>(i)] * mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
      kernel(L, QuadData{g.area * rule.weights[q], st, sr, x, g.diameter}, k);
    }
    const auto tn = test.cell_nodes(k);
    const auto rn = trial.cell_nodes(k);
    for (int a = 0; a < test.local_nodes(); ++a) {
      for (int c = 0; c < test.components(); ++c) {
        const int row = test.dof(tn[static_cast<std::size_t>(a)], c);
        const int lr = a * test.components() + c;
        for (int b = 0; b < trial.local_nodes(); ++b) {
          for (int d = 0; d < trial.components(); ++d) {
            const double v = L(lr, b * trial.components() + d);
            if (v != 0.0) triplets.push_back({row, trial.dof(rn[static_cast<std::size_t>(b)], d), v});
          }
        }
      }
    }
  }
  return SparseMatrix::from_triplets(test.dof_count(), trial.dof_count(), std::move(triplets));
}

template <class Kernel>
Vector assemble_vector(const FunctionSpace& test, Kernel&& kernel) {
  const Mesh& mesh = test.mesh();
  const TriangleRule& rule = triangle_rule_degree5();
  Vector out = Vector::Zero(test.dof_count());
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const ElementGeometry g = mesh.element_geometry(k);
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(k)];
    std::array<double, kMaxLocal> local{};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.points[q];
      const ShapeValues st = evaluate_shape(test.family(), g, lam);
      Vec2 x{};
      for (int i = 0; i < 3; ++i) x = x + lam[static_cast<std::size_t>(i)] * mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])];
      kernel(local, QuadData{g.area * rule.weights[q], st, st, x, g.diameter});
    }
    const auto tn = test.cell_nodes(k);
    for (int a = 0; a < test.local_nodes(); ++a) {
      for (int c = 0; c < test.components(); ++c) {
        out[test.dof(tn[static_cast<std::size_t>(a)], c)] += local[static_cast<std::size_t>(a * test.components() + c)];
      }
    }
  }
  return out;
}

double comp(Vec2 v, int i) { return i == 0 ? v.x : v.y; }
double second(const ShapeValues& s, int a, int k) {
  return k == 0 ? s.dxx[static_cast<std::size_t>(a)] : s.dyy[static_cast<std::size_t>(a)];
}

void require_vector(const FunctionSpace& Vh, const char* what) {
  if (Vh.components() != 2) throw InvalidArgument(std::string(what) + ": velocity space must be a vector space");
}
void require_scalar(const FunctionSpace& Qh, const char* what) {
  if (Qh.components() != 1) throw InvalidArgument(std::string(what) + ": pressure space must be scalar");
}
void require_same_mesh(const FunctionSpace& a, const FunctionSpace& b, const char* what) {
  if (&a.mesh() != &b.mesh()) throw InvalidArgument(std::string(what) + ": spaces live on different meshes");
}

/// int d_dir u_c d_dir v_c summed over components.
SparseMatrix stiffness_direction(const FunctionSpace& Vh, int dir) {
  const int nc = Vh.components();
  return assemble_matrix(Vh, Vh, [&](LocalMatrix& L, const QuadData& q, int) {
    for (int a = 0; a < q.test.count; ++a) {
      const double ga = comp(q.test.grad[static_cast<std::size_t>(a)], dir);
      for (int b = 0; b < q.trial.count; ++b) {
        const double v = q.weight * ga * comp(q.trial.grad[static_cast<std::size_t>(b)], dir);
        for (int c = 0; c < nc; ++c) L(a * nc + c, b * nc + c) += v;
      }
    }
  });
}

}  // namespace

AffineOperator<SparseMatrix> assemble_viscous(const FunctionSpace& Vh) {
  require_vector(Vh, "assemble_viscous");
  AffineOperator<SparseMatrix> A;
  A.add({1.0, 1, -1}, stiffness_direction(Vh, 0));
  A.add({1.0, 1, 1}, stiffness_direction(Vh, 1));
  return A;
}

AffineOperator<SparseMatrix> assemble_divergence(const FunctionSpace& Vh, const FunctionSpace& Qh) {
  require_vector(Vh, "assemble_divergence");
  require_scalar(Qh, "assemble_divergence");
  require_same_mesh(Vh, Qh, "assemble_divergence");
  AffineOperator<SparseMatrix> B;
  for (int dir = 0; dir < 2; ++dir) {
    B.add({1.0, 0, dir == 0 ? 0 : 1},
          assemble_matrix(Qh, Vh, [&](LocalMatrix& L, const QuadData& q, int) {
            for (int i = 0; i < q.test.count; ++i) {
              for (int b = 0; b < q.trial.count; ++b) {
                L(i, b * 2 + dir) -= q.weight * q.test.value[static_cast<std::size_t>(i)] *
                                     comp(q.trial.grad[static_cast<std::size_t>(b)], dir);
              }
            }
          }));
  }
  return B;
}

SparseMatrix assemble_velocity_gram(const FunctionSpace& Vh) {
  const SparseMatrix x = stiffness_direction(Vh, 0);
  const SparseMatrix y = stiffness_direction(Vh, 1);
  const std::array<double, 2> one{1.0, 1.0};
  const std::array<const SparseMatrix*, 2> ms{&x, &y};
  return linear_combination(one, ms);
}

SparseMatrix assemble_mass(const FunctionSpace& Qh) {
  require_scalar(Qh, "assemble_mass");
  return assemble_matrix(Qh, Qh, [](LocalMatrix& L, const QuadData& q, int) {
    for (int i = 0; i < q.test.count; ++i) {
      for (int j = 0; j < q.trial.count; ++j) {
        L(i, j) += q.weight * q.test.value[static_cast<std::size_t>(i)] * q.trial.value[static_cast<std::size_t>(j)];
      }
    }
  });
}

Vector assemble_mean_weights(const FunctionSpace& Qh) {
  require_scalar(Qh, "assemble_mean_weights");
  return assemble_vector(Qh, [](std::array<double, kMaxLocal>& l, const QuadData& q) {
    for (int i = 0; i < q.test.count; ++i) l[static_cast<std::size_t>(i)] += q.weight * q.test.value[static_cast<std::size_t>(i)];
  });
}

// ------------------------------------------------------------------ trilinear

TrilinearOperator::TrilinearOperator(TrilinearForm form, std::shared_ptr<const FunctionSpace> velocity,
                                     std::shared_ptr<const FunctionSpace> test, double delta,
                                     std::vector<TrilinearTerm> terms)
    : form_(form), velocity_(std::move(velocity)), test_(std::move(test)), delta_(delta),
      terms_(std::move(terms)) {
  require_vector(*velocity_, "TrilinearOperator");
  if (form_ == TrilinearForm::SupgPressure) {
    require_scalar(*test_, "TrilinearOperator");
  } else {
    require_vector(*test_, "TrilinearOperator");
  }
  require_same_mesh(*velocity_, *test_, "TrilinearOperator");
}

SparseMatrix TrilinearOperator::matrix(std::size_t qi, const Vector& fixed, Slot slot) const {
  const FunctionSpace& V = *velocity_;
  if (fixed.size() != V.dof_count()) {
    throw InvalidArgument("TrilinearOperator: field does not belong to the velocity space");
  }
  const TrilinearTerm& term = terms_.at(qi);
  const int j = term.j;
  const int idx = term.index;
  const int tc = test_->components();
  return assemble_matrix(*test_, V, [&](LocalMatrix& L, const QuadData& q, int k) {
    const auto nodes = V.cell_nodes(k);
    // Fixed field at the point (values for Advecting, gradients for Transported).
    std::array<double, 2> val{0.0, 0.0};
    std::array<Vec2, 2> grad{};
    for (int b = 0; b < q.trial.count; ++b) {
      for (int c = 0; c < 2; ++c) {
        const double coef = fixed[V.dof(nodes[static_cast<std::size_t>(b)], c)];
        val[static_cast<std::size_t>(c)] += coef * q.trial.value[static_cast<std::size_t>(b)];
        grad[static_cast<std::size_t>(c)] = grad[static_cast<std::size_t>(c)] + coef * q.trial.grad[static_cast<std::size_t>(b)];
      }
    }
    const double w = form_ == TrilinearForm::Convection ? q.weight : q.weight * delta_ * q.h * q.h;
    for (int a = 0; a < q.test.count; ++a) {
      for (int b = 0; b < q.trial.count; ++b) {
        const double phi_b = q.trial.value[static_cast<std::size_t>(b)];
        const double dphi_b = comp(q.trial.grad[static_cast<std::size_t>(b)], j);
        switch (form_) {
          case TrilinearForm::Convection: {
            const double va = q.test.value[static_cast<std::size_t>(a)];
            for (int m = 0; m < 2; ++m) {
              if (slot == Slot::Advecting) {
                L(a * tc + m, b * 2 + m) += w * val[static_cast<std::size_t>(j)] * dphi_b * va;
              } else {
                L(a * tc + m, b * 2 + j) += w * phi_b * comp(grad[static_cast<std::size_t>(m)], j) * va;
              }
            }
            break;
          }
          case TrilinearForm::SupgPressure: {
            const int m = idx;
            const double dq = comp(q.test.grad[static_cast<std::size_t>(a)], m);
            if (slot == Slot::Advecting) {
              L(a, b * 2 + m) += w * val[static_cast<std::size_t>(j)] * dphi_b * dq;
            } else {
              L(a, b * 2 + j) += w * phi_b * comp(grad[static_cast<std::size_t>(m)], j) * dq;
            }
            break;
          }
          case TrilinearForm::SupgVelocity: {
            const double lap = second(q.test, a, idx);
            for (int m = 0; m < 2; ++m) {
              if (slot == Slot::Advecting) {
                L(a * tc + m, b * 2 + m) += w * val[static_cast<std::size_t>(j)] * dphi_b * lap;
              } else {
                L(a * tc + m, b * 2 + j) += w * phi_b * comp(grad[static_cast<std::size_t>(m)], j) * lap;
              }
            }
            break;
          }
        }
      }
    }
  });
}

AffineOperator<SparseMatrix> TrilinearOperator::at(const Vector& fixed, Slot slot) const {
  AffineOperator<SparseMatrix> out;
  for (std::size_t q = 0; q < terms_.size(); ++q) out.add(terms_[q].theta, matrix(q, fixed, slot));
  return out;
}

Vector TrilinearOperator::apply(std::size_t q, const Vector& w, const Vector& u) const {
  return matrix(q, w, Slot::Advecting).multiply(u);
}

TrilinearOperator convection_operator(std::shared_ptr<const FunctionSpace> Vh) {
  std::vector<TrilinearTerm> terms{{{1.0, 0, 0}, 0, -1}, {{1.0, 0, 1}, 1, -1}};
  return TrilinearOperator(TrilinearForm::Convection, Vh, Vh, 1.0, std::move(terms));
}

AffineOperator<SparseMatrix> assemble_convection(std::shared_ptr<const FunctionSpace> Vh,
                                                 const FeFunction& w) {
  if (w.space.get() != Vh.get() &&
      (w.space->family() != Vh->family() || &w.space->mesh() != &Vh->mesh() ||
       w.space->components() != Vh->components())) {
    throw InvalidArgument("assemble_convection: transport field from a different space");
  }
  return convection_operator(std::move(Vh)).at(w.coefficients, Slot::Advecting);
}

// -------------------------------------------------------------- stabilisation

namespace {

int is_x(int d) { return d == 0 ? 1 : 0; }

SparseMatrix edge_jump_matrix(const FunctionSpace& Qh, double delta) {
  std::vector<Triplet> t;
  for (const InteriorEdge& e : Qh.mesh().interior_edges()) {
    const double v = delta * e.length * e.length;
    t.push_back({e.left, e.left, v});
    t.push_back({e.right, e.right, v});
    t.push_back({e.left, e.right, -v});
    t.push_back({e.right, e.left, -v});
  }
  return SparseMatrix::from_triplets(Qh.dof_count(), Qh.dof_count(), std::move(t));
}

StabilizationBlocks linear_blocks(std::shared_ptr<const FunctionSpace> Vh,
                                  std::shared_ptr<const FunctionSpace> Qh,
                                  const StabilizationConfig& config) {
  require_vector(*Vh, "stabilization");
  require_scalar(*Qh, "stabilization");
  require_same_mesh(*Vh, *Qh, "stabilization");
  config.validate(Qh->family());
  StabilizationBlocks s;
  const double delta = config.delta;
  switch (config.method) {
    case Method::None:
      return s;
    case Method::EdgeJumpP1P0:
      s.spq.add({1.0, 0, 0}, edge_jump_matrix(*Qh, delta));
      return s;
    default:
      break;
  }
  const FunctionSpace& V = *Vh;
  const FunctionSpace& Q = *Qh;
  // s^{p,q}: delta h^2 int grad_o p . grad_o q |J| -> (1/a) xx + a yy.
  for (int m = 0; m < 2; ++m) {
    s.spq.add({1.0, 0, 1 - 2 * is_x(m)},
              assemble_matrix(Q, Q, [&](LocalMatrix& L, const QuadData& q, int) {
                const double w = q.weight * delta * q.h * q.h;
                for (int i = 0; i < q.test.count; ++i) {
                  for (int jj = 0; jj < q.trial.count; ++jj) {
                    L(i, jj) += w * comp(q.test.grad[static_cast<std::size_t>(i)], m) *
                                comp(q.trial.grad[static_cast<std::size_t>(jj)], m);
                  }
                }
              }));
  }
  if (config.method == Method::BrezziPitkaranta) return s;
  if (V.family() == Family::P1) {
    // Second derivatives of P1 functions vanish: the Laplacian blocks are zero.
  } else {
    // s^{u,q}: delta h^2 int (-nu Lap_o u) . grad_o q |J|.
    for (int j = 0; j < 2; ++j) {
      for (int m = 0; m < 2; ++m) {
        s.suq.add({-1.0, 1, 1 - 2 * is_x(j) - is_x(m)},
                  assemble_matrix(Q, V, [&](LocalMatrix& L, const QuadData& q, int) {
                    const double w = q.weight * delta * q.h * q.h;
                    for (int i = 0; i < q.test.count; ++i) {
                      const double dq = comp(q.test.grad[static_cast<std::size_t>(i)], m);
                      for (int b = 0; b < q.trial.count; ++b) {
                        L(i, b * 2 + m) += w * second(q.trial, b, j) * dq;
                      }
                    }
                  }));
      }
    }
    if (config.rho != 0) {
      const double rho = config.rho;
      // s^{u,v} = delta h^2 int (-nu Lap_o u).(-rho nu Lap_o v) |J|
      for (int j = 0; j < 2; ++j) {
        for (int kk = 0; kk < 2; ++kk) {
          s.suv.add({rho, 2, 1 - 2 * is_x(j) - 2 * is_x(kk)},
                    assemble_matrix(V, V, [&](LocalMatrix& L, const QuadData& q, int) {
                      const double w = q.weight * delta * q.h * q.h;
                      for (int a = 0; a < q.test.count; ++a) {
                        for (int b = 0; b < q.trial.count; ++b) {
                          const double v = w * second(q.trial, b, j) * second(q.test, a, kk);
                          L(a * 2, b * 2) += v;
                          L(a * 2 + 1, b * 2 + 1) += v;
                        }
                      }
                    }));
        }
      }
      // s^{p,v} = delta h^2 int grad_o p . (-rho nu Lap_o v) |J|
      for (int m = 0; m < 2; ++m) {
        for (int kk = 0; kk < 2; ++kk) {
          s.spv.add({-rho, 1, 1 - is_x(m) - 2 * is_x(kk)},
                    assemble_matrix(V, Q, [&](LocalMatrix& L, const QuadData& q, int) {
                      const double w = q.weight * delta * q.h * q.h;
                      for (int a = 0; a < q.test.count; ++a) {
                        for (int jj = 0; jj < q.trial.count; ++jj) {
                          L(a * 2 + m, jj) += w * comp(q.trial.grad[static_cast<std::size_t>(jj)], m) *
                                              second(q.test, a, kk);
                        }
                      }
                    }));
        }
      }
    }
  }
  return s;
}

}  // namespace

StabilizationBlocks assemble_stokes_stabilization(std::shared_ptr<const FunctionSpace> Vh,
                                                  std::shared_ptr<const FunctionSpace> Qh,
                                                  const StabilizationConfig& config) {
  return linear_blocks(std::move(Vh), std::move(Qh), config);
}

StabilizationBlocks assemble_ns_stabilization(std::shared_ptr<const FunctionSpace> Vh,
                                              std::shared_ptr<const FunctionSpace> Qh,
                                              const StabilizationConfig& config,
                                              const FeFunction* w) {
  if (config.method != Method::SupgFamily) {
    throw InvalidArgument("assemble_ns_stabilization: method must be the SUPG family");
  }
  StabilizationBlocks s = linear_blocks(Vh, Qh, config);
  std::vector<TrilinearTerm> tq;
  for (int j = 0; j < 2; ++j) {
    for (int m = 0; m < 2; ++m) tq.push_back({{1.0, 0, 1 - is_x(j) - is_x(m)}, j, m});
  }
  s.tq.emplace(TrilinearForm::SupgPressure, Vh, Qh, config.delta, std::move(tq));
  if (config.rho != 0) {
    std::vector<TrilinearTerm> tv;
    for (int j = 0; j < 2; ++j) {
      for (int kk = 0; kk < 2; ++kk) {
        tv.push_back({{-static_cast<double>(config.rho), 1, 1 - is_x(j) - 2 * is_x(kk)}, j, kk});
      }
    }
    s.tv.emplace(TrilinearForm::SupgVelocity, Vh, Vh, config.delta, std::move(tv));
  }
  if (w) {
    for (std::size_t q = 0; q < s.tq->size(); ++q) {
      s.suq.add(s.tq->terms()[q].theta, s.tq->matrix(q, w->coefficients, Slot::Advecting));
    }
    if (s.tv) {
      for (std::size_t q = 0; q < s.tv->size(); ++q) {
        s.suv.add(s.tv->terms()[q].theta, s.tv->matrix(q, w->coefficients, Slot::Advecting));
      }
    }
  }
  return s;
}

RightHandSide assemble_rhs(std::shared_ptr<const FunctionSpace> Vh,
                           std::shared_ptr<const FunctionSpace> Qh, const FeFunction& lifting,
                           Problem problem, const StabilizationBlocks* stab) {
  if (lifting.coefficients.size() != Vh->dof_count()) {
    throw InvalidArgument("assemble_rhs: lifting does not belong to the velocity space");
  }
  const Vector& l = lifting.coefficients;
  RightHandSide r;
  const auto A = assemble_viscous(*Vh);
  for (const auto& t : A.terms()) r.f.add(t.theta, Vector(-t.op.multiply(l)));
  const auto B = assemble_divergence(*Vh, *Qh);
  for (const auto& t : B.terms()) r.g.add(t.theta, Vector(-t.op.multiply(l)));
  if (problem == Problem::NavierStokes) {
    const TrilinearOperator c = convection_operator(Vh);
    for (std::size_t q = 0; q < c.size(); ++q) {
      r.f.add(c.terms()[q].theta, Vector(-c.apply(q, l, l)));
    }
  }
  if (stab) {
    for (const auto& t : stab->suv.terms()) r.f.add(t.theta, t.op.multiply(l));
    for (const auto& t : stab->suq.terms()) r.g.add(t.theta, t.op.multiply(l));
    if (problem == Problem::NavierStokes) {
      if (stab->tq) {
        for (std::size_t q = 0; q < stab->tq->size(); ++q) r.g.add(stab->tq->terms()[q].theta, stab->tq->apply(q, l, l));
      }
      if (stab->tv) {
        for (std::size_t q = 0; q < stab->tv->size(); ++q) r.f.add(stab->tv->terms()[q].theta, stab->tv->apply(q, l, l));
      }
    }
  }
  return r;
}

BodyForceTerms assemble_body_force(const FunctionSpace& Vh, const FunctionSpace& Qh,
                                   const StabilizationConfig& config, const VectorField& f) {
  require_vector(Vh, "assemble_body_force");
  require_scalar(Qh, "assemble_body_force");
  BodyForceTerms out;
  out.momentum.add({1.0, 0, 1}, assemble_vector(Vh, [&](std::array<double, kMaxLocal>& l, const QuadData& q) {
    const auto fv = f(q.x);
    for (int a = 0; a < q.test.count; ++a) {
      for (int c = 0; c < 2; ++c) {
        l[static_cast<std::size_t>(a * 2 + c)] += q.weight * fv[static_cast<std::size_t>(c)] * q.test.value[static_cast<std::size_t>(a)];
      }
    }
  }));
  const bool residual = config.method == Method::BrezziPitkaranta ||
                        config.method == Method::ResidualBased || config.method == Method::SupgFamily;
  if (!residual) return out;
  const double delta = config.delta;
  for (int m = 0; m < 2; ++m) {
    out.mass.add({-1.0, 0, 1 - is_x(m)}, assemble_vector(Qh, [&](std::array<double, kMaxLocal>& l, const QuadData& q) {
      const auto fv = f(q.x);
      const double w = q.weight * delta * q.h * q.h;
      for (int i = 0; i < q.test.count; ++i) {
        l[static_cast<std::size_t>(i)] += w * fv[static_cast<std::size_t>(m)] * comp(q.test.grad[static_cast<std::size_t>(i)], m);
      }
    }));
  }
  if (config.rho != 0 && config.method != Method::BrezziPitkaranta && Vh.family() != Family::P1) {
    for (int kk = 0; kk < 2; ++kk) {
      out.momentum.add({static_cast<double>(config.rho), 1, 1 - 2 * is_x(kk)},
                       assemble_vector(Vh, [&](std::array<double, kMaxLocal>& l, const QuadData& q) {
                         const auto fv = f(q.x);
                         const double w = q.weight * delta * q.h * q.h;
                         for (int a = 0; a < q.test.count; ++a) {
                           for (int c = 0; c < 2; ++c) {
                             l[static_cast<std::size_t>(a * 2 + c)] += w * fv[static_cast<std::size_t>(c)] * second(q.test, a, kk);
                           }
                         }
                       }));
    }
  }
  return out;
}

SparseMatrix embed(const SparseMatrix& m, int rows, int cols, int row_offset, int col_offset) {
  if (row_offset + m.rows() > rows || col_offset + m.cols() > cols) {
    throw InvalidArgument("embed: block does not fit");
  }
  std::vector<Triplet> t;
  t.reserve(m.nnz());
  for (int r = 0; r < m.rows(); ++r) {
    for (int p = m.row_offsets()[static_cast<std::size_t>(r)]; p < m.row_offsets()[static_cast<std::size_t>(r) + 1]; ++p) {
      t.push_back({r + row_offset, m.column_indices()[static_cast<std::size_t>(p)] + col_offset,
                   m.values()[static_cast<std::size_t>(p)]});
    }
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

}  // namespace stabrb
