#pragma once

#include <optional>
#include <string_view>

#include "stabrb/affine.hpp"
#include "stabrb/fespace.hpp"
#include "stabrb/linalg.hpp"

namespace stabrb {

enum class Method { None, BrezziPitkaranta, ResidualBased, SupgFamily, EdgeJumpP1P0 };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// delta is dimensionless and enters through the element weight delta h_K^2
/// (h_sigma for the edge jump). `apply_online` is false for the offline-only
/// options.
struct StabilizationConfig {
  Method method = Method::None;
  int rho = 0;
  double delta = 0.0;
  bool apply_online = true;

  /// Throws InvalidArgument when delta < 0, rho not in {-1, 0, 1}, or the
  /// edge jump is requested with a non-P0 pressure (when `pressure` is given).
  void validate(std::optional<Family> pressure = std::nullopt) const;
  bool active() const { return method != Method::None; }
};

/// a(u, v): terms nu/a * int du/dx.dv/dx and nu*a * int du/dy.dv/dy.
AffineOperator<SparseMatrix> assemble_viscous(const FunctionSpace& Vh);

/// b(v, q) = -int q chi_ij dv_j/dx_i: terms 1 * (-int q dv1/dx), a * (-int q dv2/dy).
AffineOperator<SparseMatrix> assemble_divergence(const FunctionSpace& Vh, const FunctionSpace& Qh);

/// H^1_0 seminorm Gram matrix of a vector space (mu independent).
SparseMatrix assemble_velocity_gram(const FunctionSpace& Vh);

/// L^2 mass matrix of a scalar space.
SparseMatrix assemble_mass(const FunctionSpace& Qh);

/// m_k = int psi_k, for the zero-mean constraint.
Vector assemble_mean_weights(const FunctionSpace& Qh);

/// Trilinear forms t(w, u, test). `w` transports, `u` is transported.
///   Convection:   int sum_m w_j d_j u_m v_m
///   SupgPressure: delta sum_K h_K^2 int w_j d_j u_m d_m q
///   SupgVelocity: delta sum_K h_K^2 int sum_m w_j d_j u_m d_kk v_m
enum class TrilinearForm { Convection, SupgPressure, SupgVelocity };
enum class Slot { Advecting, Transported };

struct TrilinearTerm {
  Monomial theta;
  int j;      // transport direction
  int index;  // m (SupgPressure) or k (SupgVelocity); unused for Convection
};

class TrilinearOperator {
 public:
  TrilinearOperator(TrilinearForm form, std::shared_ptr<const FunctionSpace> velocity,
                    std::shared_ptr<const FunctionSpace> test, double delta,
                    std::vector<TrilinearTerm> terms);

  TrilinearForm form() const { return form_; }
  const std::vector<TrilinearTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  const FunctionSpace& test_space() const { return *test_; }
  const FunctionSpace& velocity_space() const { return *velocity_; }

  /// Matrix of term q with the field `fixed` inserted in `slot`; rows are
  /// test dofs, columns the dofs of the remaining velocity slot.
  SparseMatrix matrix(std::size_t q, const Vector& fixed, Slot slot) const;

  /// All terms at once with `fixed` in `slot`.
  AffineOperator<SparseMatrix> at(const Vector& fixed, Slot slot) const;

  /// t_q(w, u, .) as a vector over test dofs.
  Vector apply(std::size_t q, const Vector& w, const Vector& u) const;

 private:
  TrilinearForm form_;
  std::shared_ptr<const FunctionSpace> velocity_;
  std::shared_ptr<const FunctionSpace> test_;
  double delta_;
  std::vector<TrilinearTerm> terms_;
};

/// c(w, u, v) with coefficients chi: terms 1 (j = x) and a (j = y).
TrilinearOperator convection_operator(std::shared_ptr<const FunctionSpace> Vh);

/// C(w; mu) of the Newton/Picard linearisation: rows v, columns u.
AffineOperator<SparseMatrix> assemble_convection(std::shared_ptr<const FunctionSpace> Vh,
                                                 const FeFunction& w);

/// Stabilisation forms as defined (positive); the saddle-point system uses
/// them with a minus sign. Empty operators mean "absent". `tq`/`tv` hold the
/// convective parts of s^{u,q} and s^{u,v} for the SUPG family.
struct StabilizationBlocks {
  AffineOperator<SparseMatrix> suv;  // velocity x velocity
  AffineOperator<SparseMatrix> spv;  // velocity x pressure
  AffineOperator<SparseMatrix> suq;  // pressure x velocity
  AffineOperator<SparseMatrix> spq;  // pressure x pressure
  std::optional<TrilinearOperator> tq;
  std::optional<TrilinearOperator> tv;
};

/// Residual-based (Stokes family), Brezzi-Pitkaranta or P1/P0 edge jump
/// blocks. SupgFamily is accepted and gives its linear part.
StabilizationBlocks assemble_stokes_stabilization(std::shared_ptr<const FunctionSpace> Vh,
                                                  std::shared_ptr<const FunctionSpace> Qh,
                                                  const StabilizationConfig& config);

/// Linear blocks plus the convective operators; with `w` given, the
/// returned suq/suv additionally carry the terms T_q(w) (w transporting).
StabilizationBlocks assemble_ns_stabilization(std::shared_ptr<const FunctionSpace> Vh,
                                              std::shared_ptr<const FunctionSpace> Qh,
                                              const StabilizationConfig& config,
                                              const FeFunction* w = nullptr);

/// Lifted right-hand sides. f = -A l (- C(l) l for Navier-Stokes),
/// g = -B l; with stabilisation also + s^{u,v}(l, .) in f and + s^{u,q}(l, .)
/// in g (including the convective part for SUPG).
struct RightHandSide {
  AffineOperator<Vector> f;
  AffineOperator<Vector> g;
};

RightHandSide assemble_rhs(std::shared_ptr<const FunctionSpace> Vh,
                           std::shared_ptr<const FunctionSpace> Qh, const FeFunction& lifting,
                           Problem problem, const StabilizationBlocks* stabilization = nullptr);

/// Body force given in reference coordinates. Momentum: a * int f.v plus,
/// for rho != 0, the consistent stabilisation term; mass: the consistent
/// term -delta sum h^2 int f . grad q (residual-based methods only).
struct BodyForceTerms {
  AffineOperator<Vector> momentum;
  AffineOperator<Vector> mass;
};

BodyForceTerms assemble_body_force(const FunctionSpace& Vh, const FunctionSpace& Qh,
                                   const StabilizationConfig& config, const VectorField& f);

/// Embed `m` into an (rows x cols) matrix at the given offsets.
SparseMatrix embed(const SparseMatrix& m, int rows, int cols, int row_offset, int col_offset);

}  // namespace stabrb
