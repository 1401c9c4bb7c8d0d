#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "stabrb/affine.hpp"
#include "stabrb/assembly.hpp"
#include "stabrb/fespace.hpp"
#include "stabrb/linalg.hpp"
#include "stabrb/mesh.hpp"

namespace stabrb {

enum class FePair { P1P1, P2P2, P1P0, P2P1 };

std::string_view to_string(FePair p);
FePair fe_pair_from_string(std::string_view s);
Family velocity_family(FePair p);
Family pressure_family(FePair p);

struct ParameterBox {
  double mu1_min = 0.0, mu1_max = 0.0;
  double mu2_min = 0.0, mu2_max = 0.0;

  bool contains(Parameter mu) const {
    return mu.mu1 >= mu1_min && mu.mu1 <= mu1_max && mu.mu2 >= mu2_min && mu.mu2 <= mu2_max;
  }
  Parameter center() const { return {0.5 * (mu1_min + mu1_max), 0.5 * (mu2_min + mu2_max)}; }
};

struct ProblemConfig {
  Problem problem = Problem::Stokes;
  FePair pair = FePair::P1P1;
  StabilizationConfig stabilization;
  ParameterBox box{0.25, 0.75, 1.0, 3.0};
  int nx = 32;
  int ny = 16;
  Diagonal diagonal = Diagonal::Forward;
  double mu_bar2 = 1.0;
  double lid_speed = 1.0;  // 0 gives the homogeneous problem (testing hook)

  /// Throws InvalidArgument naming the violated invariant.
  void validate() const;
};

struct SolverDiagnostics {
  int iterations = 0;
  std::vector<double> residual_history;  // relative residuals, one per evaluation
  double final_residual = 0.0;
  int continuation_steps = 0;
};

struct FeSolution {
  FeFunction velocity;  // homogeneous part (zero on the Dirichlet boundary)
  FeFunction pressure;
  FeFunction lifting;
  Parameter mu;
  SolverDiagnostics diagnostics;

  Vector total_velocity() const { return velocity.coefficients + lifting.coefficients; }
};

/// Everything mu-independent of one discretised problem: mesh, spaces,
/// affine operators, Gram matrices. Immutable after construction; solves
/// are const and may run concurrently.
class HighFidelityModel {
 public:
  explicit HighFidelityModel(ProblemConfig config, std::optional<VectorField> body_force = std::nullopt);

  const ProblemConfig& config() const { return config_; }
  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const FunctionSpace> velocity_space() const { return Vh_; }
  std::shared_ptr<const FunctionSpace> pressure_space() const { return Qh_; }
  const FeFunction& lifting() const { return lifting_; }
  const GeometryMap& geometry() const { return geometry_; }

  int velocity_dofs() const { return Vh_->dof_count(); }
  int pressure_dofs() const { return Qh_->dof_count(); }
  const std::vector<int>& free_velocity_dofs() const { return free_; }

  const AffineOperator<SparseMatrix>& viscous() const { return A_; }
  const AffineOperator<SparseMatrix>& divergence() const { return B_; }
  const StabilizationBlocks& stabilization() const { return stab_; }
  const std::optional<TrilinearOperator>& convection() const { return convection_; }
  bool stabilized() const { return config_.stabilization.active(); }
  bool nonlinear() const { return config_.problem == Problem::NavierStokes; }

  const SparseMatrix& velocity_gram() const { return Xu_; }
  const SparseMatrix& pressure_mass() const { return Mp_; }
  const Vector& mean_weights() const { return mean_; }

  double nu(Parameter mu) const { return viscosity(config_.problem, mu); }
  double scaling(Parameter mu) const { return geometry_.scaling(mu.mu2); }

  /// Residual of the (stabilised when `stabilized`) discrete equations on all
  /// velocity and pressure rows, for a total velocity (lifting included).
  /// Layout [velocity rows | pressure rows]; no multiplier term.
  Vector residual(Parameter mu, const Vector& total_velocity, const Vector& pressure,
                  bool stabilized = true) const;

  /// Residual restricted to free velocity rows and all pressure rows.
  Vector restricted_residual(Parameter mu, const Vector& total_velocity, const Vector& pressure,
                             bool stabilized = true) const;

  /// ||restricted residual|| / ||restricted residual at (lifting, 0)||.
  double relative_residual(Parameter mu, const Vector& total_velocity, const Vector& pressure,
                           bool stabilized = true) const;

  /// Jacobian on the full [velocity | pressure] index space.
  SparseMatrix jacobian(Parameter mu, const Vector& total_velocity, bool stabilized = true) const;

  /// Stokes part only (no convection), with this model's viscosity rule.
  FeSolution solve_stokes(Parameter mu) const;

  /// Newton from `initial_guess` (Stokes solve when absent). Throws
  /// NonConvergence after 25 iterations.
  FeSolution solve_navier_stokes(Parameter mu, const FeSolution* initial_guess = nullptr) const;

  /// Newton along Re_0 = min(Re, 10) ... Re geometrically, `steps` solves.
  FeSolution solve_navier_stokes_continuation(Parameter mu, int steps = 6) const;

  /// Stokes or Navier-Stokes according to the configuration; Navier-Stokes
  /// falls back to continuation when plain Newton fails.
  FeSolution solve(Parameter mu) const;

  /// T^mu q: X_u s = B(mu)^T q on free dofs, s = 0 on the boundary.
  Vector supremizer(Parameter mu, const Vector& pressure) const;

  static constexpr double kNewtonTolerance = 1e-10;
  static constexpr int kMaxNewtonIterations = 25;

 private:
  FeSolution newton(Parameter mu, bool with_convection, const FeSolution* initial_guess) const;
  SparseMatrix restrict_with_multiplier(const SparseMatrix& full) const;
  Vector body_momentum(Parameter mu, bool stabilized) const;
  Vector body_mass(Parameter mu, bool stabilized) const;

  ProblemConfig config_;
  GeometryMap geometry_;
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const FunctionSpace> Vh_;
  std::shared_ptr<const FunctionSpace> Qh_;
  FeFunction lifting_;
  AffineOperator<SparseMatrix> A_;
  AffineOperator<SparseMatrix> B_;
  StabilizationBlocks stab_;
  std::optional<TrilinearOperator> convection_;
  std::optional<BodyForceTerms> body_;
  AffineOperator<SparseMatrix> system_plain_;  // embedded, signs folded in
  AffineOperator<SparseMatrix> system_stab_;
  SparseMatrix Xu_;
  SparseMatrix Mp_;
  Vector mean_;
  std::vector<int> free_;
  std::vector<int> reduced_index_;  // full velocity/pressure index -> restricted index or -1
  std::shared_ptr<const SparseLu> xu_free_lu_;
};

}  // namespace stabrb
