#include "stabrb/hifi.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "stabrb/errors.hpp"

namespace stabrb {

std::string_view to_string(FePair p) {
  switch (p) {
    case FePair::P1P1: return "P1P1";
    case FePair::P2P2: return "P2P2";
    case FePair::P1P0: return "P1P0";
    case FePair::P2P1: return "P2P1";
  }
  return "?";
}

FePair fe_pair_from_string(std::string_view s) {
  for (FePair p : {FePair::P1P1, FePair::P2P2, FePair::P1P0, FePair::P2P1}) {
    if (to_string(p) == s) return p;
  }
  throw InvalidArgument("unknown FE pair '" + std::string(s) + "'");
}

Family velocity_family(FePair p) {
  return (p == FePair::P2P2 || p == FePair::P2P1) ? Family::P2 : Family::P1;
}

Family pressure_family(FePair p) {
  switch (p) {
    case FePair::P1P1: return Family::P1;
    case FePair::P2P2: return Family::P2;
    case FePair::P1P0: return Family::P0;
    case FePair::P2P1: return Family::P1;
  }
  return Family::P1;
}

void ProblemConfig::validate() const {
  stabilization.validate(pressure_family(pair));
  const Method m = stabilization.method;
  if (pair == FePair::P2P1 && m != Method::None) {
    throw InvalidArgument("config: the P2P1 pair is inf-sup stable and requires method none");
  }
  if (pair == FePair::P1P0 && m != Method::None && m != Method::EdgeJumpP1P0) {
    throw InvalidArgument("config: the P1P0 pair requires method edge-jump or none");
  }
  if (m == Method::EdgeJumpP1P0 && pair != FePair::P1P0) {
    throw InvalidArgument("config: the edge jump is only valid with the P1P0 pair");
  }
  if (!(box.mu1_min <= box.mu1_max) || !(box.mu2_min <= box.mu2_max)) {
    throw InvalidArgument("config: parameter ranges must satisfy min <= max");
  }
  if (!(box.mu1_min > 0.0)) throw InvalidArgument("config: mu1 must be positive over the parameter box");
  if (!(box.mu2_min > -1.0)) throw InvalidArgument("config: mu2 must exceed -1 (positive domain length)");
  if (nx < 1 || ny < 1) throw InvalidArgument("config: mesh cell counts must be >= 1");
  if (!(mu_bar2 > -1.0)) throw InvalidArgument("config: reference mu2 must exceed -1");
}

namespace {

Monomial negated(Monomial m) {
  m.scale = -m.scale;
  return m;
}

}  // namespace

HighFidelityModel::HighFidelityModel(ProblemConfig config, std::optional<VectorField> body_force)
    : config_(config) {
  config_.validate();
  geometry_.mu_bar2 = config_.mu_bar2;
  mesh_ = std::make_shared<const Mesh>(geometry_.reference_length(), 1.0, config_.nx, config_.ny, config_.diagonal);
  Vh_ = make_space(mesh_, velocity_family(config_.pair), 2);
  Qh_ = make_space(mesh_, pressure_family(config_.pair), 1);
  lifting_ = interpolate_lifting(Vh_);
  lifting_.coefficients *= config_.lid_speed;

  A_ = assemble_viscous(*Vh_);
  B_ = assemble_divergence(*Vh_, *Qh_);
  if (config_.stabilization.active()) {
    if (nonlinear() && config_.stabilization.method == Method::SupgFamily) {
      stab_ = assemble_ns_stabilization(Vh_, Qh_, config_.stabilization);
    } else {
      stab_ = assemble_stokes_stabilization(Vh_, Qh_, config_.stabilization);
    }
  }
  if (nonlinear()) convection_ = convection_operator(Vh_);
  if (body_force) body_ = assemble_body_force(*Vh_, *Qh_, config_.stabilization, *body_force);

  Xu_ = assemble_velocity_gram(*Vh_);
  Mp_ = assemble_mass(*Qh_);
  mean_ = assemble_mean_weights(*Qh_);

  const int nu = velocity_dofs(), np = pressure_dofs(), n = nu + np;
  std::vector<bool> dirichlet(static_cast<std::size_t>(nu), false);
  for (int d : Vh_->dirichlet_dofs()) dirichlet[static_cast<std::size_t>(d)] = true;
  reduced_index_.assign(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < nu; ++i) {
    if (!dirichlet[static_cast<std::size_t>(i)]) {
      free_.push_back(i);
      reduced_index_[static_cast<std::size_t>(i)] = next++;
    }
  }
  for (int k = 0; k < np; ++k) reduced_index_[static_cast<std::size_t>(nu + k)] = next++;

  for (const auto& t : A_.terms()) system_plain_.add(t.theta, embed(t.op, n, n, 0, 0));
  for (const auto& t : B_.terms()) {
    system_plain_.add(t.theta, embed(t.op, n, n, nu, 0));
    system_plain_.add(t.theta, embed(t.op.transpose(), n, n, 0, nu));
  }
  system_stab_ = system_plain_;
  for (const auto& t : stab_.suv.terms()) system_stab_.add(negated(t.theta), embed(t.op, n, n, 0, 0));
  for (const auto& t : stab_.spv.terms()) system_stab_.add(negated(t.theta), embed(t.op, n, n, 0, nu));
  for (const auto& t : stab_.suq.terms()) system_stab_.add(negated(t.theta), embed(t.op, n, n, nu, 0));
  for (const auto& t : stab_.spq.terms()) system_stab_.add(negated(t.theta), embed(t.op, n, n, nu, nu));

  // X_u on free dofs for supremizers.
  std::vector<int> free_index(static_cast<std::size_t>(nu), -1);
  for (std::size_t i = 0; i < free_.size(); ++i) free_index[static_cast<std::size_t>(free_[i])] = static_cast<int>(i);
  std::vector<Triplet> t;
  for (int r = 0; r < nu; ++r) {
    const int rr = free_index[static_cast<std::size_t>(r)];
    if (rr < 0) continue;
    for (int p = Xu_.row_offsets()[static_cast<std::size_t>(r)]; p < Xu_.row_offsets()[static_cast<std::size_t>(r) + 1]; ++p) {
      const int cc = free_index[static_cast<std::size_t>(Xu_.column_indices()[static_cast<std::size_t>(p)])];
      if (cc >= 0) t.push_back({rr, cc, Xu_.values()[static_cast<std::size_t>(p)]});
    }
  }
  const int nf = static_cast<int>(free_.size());
  xu_free_lu_ = std::make_shared<const SparseLu>(SparseMatrix::from_triplets(nf, nf, std::move(t)));
}

Vector HighFidelityModel::body_momentum(Parameter mu, bool stabilized) const {
  Vector out = Vector::Zero(velocity_dofs());
  if (!body_) return out;
  const double nu_ = nu(mu), a = scaling(mu);
  const auto& terms = body_->momentum.terms();
  for (std::size_t q = 0; q < terms.size(); ++q) {
    if (q > 0 && !stabilized) break;  // term 0 is the plain load
    out += terms[q].theta(nu_, a) * terms[q].op;
  }
  return out;
}

Vector HighFidelityModel::body_mass(Parameter mu, bool stabilized) const {
  Vector out = Vector::Zero(pressure_dofs());
  if (!body_ || !stabilized) return out;
  const double nu_ = nu(mu), a = scaling(mu);
  for (const auto& t : body_->mass.terms()) out += t.theta(nu_, a) * t.op;
  return out;
}

Vector HighFidelityModel::residual(Parameter mu, const Vector& W, const Vector& P, bool stabilized) const {
  const bool stab = stabilized && this->stabilized();
  const int nu = velocity_dofs(), np = pressure_dofs();
  if (W.size() != nu || P.size() != np) throw InvalidArgument("residual: size mismatch");
  Vector x(nu + np);
  x << W, P;
  const double nu_ = this->nu(mu), a = scaling(mu);
  const auto& sys = stab ? system_stab_ : system_plain_;
  Vector r = Vector::Zero(nu + np);
  for (const auto& t : sys.terms()) r += t.theta(nu_, a) * t.op.multiply(x);
  if (nonlinear()) {
    for (std::size_t q = 0; q < convection_->size(); ++q) {
      r.head(nu) += convection_->terms()[q].theta(nu_, a) * convection_->apply(q, W, W);
    }
    if (stab && stab_.tq) {
      for (std::size_t q = 0; q < stab_.tq->size(); ++q) {
        r.tail(np) -= stab_.tq->terms()[q].theta(nu_, a) * stab_.tq->apply(q, W, W);
      }
    }
    if (stab && stab_.tv) {
      for (std::size_t q = 0; q < stab_.tv->size(); ++q) {
        r.head(nu) -= stab_.tv->terms()[q].theta(nu_, a) * stab_.tv->apply(q, W, W);
      }
    }
  }
  r.head(nu) -= body_momentum(mu, stab);
  r.tail(np) -= body_mass(mu, stab);
  return r;
}

Vector HighFidelityModel::restricted_residual(Parameter mu, const Vector& W, const Vector& P,
                                              bool stabilized) const {
  const Vector r = residual(mu, W, P, stabilized);
  const int nf = static_cast<int>(free_.size());
  Vector out(nf + pressure_dofs());
  for (int i = 0; i < nf; ++i) out[i] = r[free_[static_cast<std::size_t>(i)]];
  out.tail(pressure_dofs()) = r.tail(pressure_dofs());
  return out;
}

double HighFidelityModel::relative_residual(Parameter mu, const Vector& W, const Vector& P,
                                            bool stabilized) const {
  const double ref = restricted_residual(mu, lifting_.coefficients, Vector::Zero(pressure_dofs()), stabilized).norm();
  const double r = restricted_residual(mu, W, P, stabilized).norm();
  return ref > 0.0 ? r / ref : r;
}

SparseMatrix HighFidelityModel::jacobian(Parameter mu, const Vector& W, bool stabilized) const {
  const bool stab = stabilized && this->stabilized();
  const int nu = velocity_dofs(), np = pressure_dofs(), n = nu + np;
  const double nu_ = this->nu(mu), a = scaling(mu);
  const auto& sys = stab ? system_stab_ : system_plain_;
  std::vector<SparseMatrix> owned;
  std::vector<double> coeffs;
  for (const auto& t : sys.terms()) {
    owned.push_back(t.op);
    coeffs.push_back(t.theta(nu_, a));
  }
  if (nonlinear()) {
    const auto add_trilinear = [&](const TrilinearOperator& op, double sign, int row_offset) {
      for (std::size_t q = 0; q < op.size(); ++q) {
        const double th = sign * op.terms()[q].theta(nu_, a);
        for (Slot s : {Slot::Advecting, Slot::Transported}) {
          owned.push_back(embed(op.matrix(q, W, s), n, n, row_offset, 0));
          coeffs.push_back(th);
        }
      }
    };
    add_trilinear(*convection_, 1.0, 0);
    if (stab && stab_.tq) add_trilinear(*stab_.tq, -1.0, nu);
    if (stab && stab_.tv) add_trilinear(*stab_.tv, -1.0, 0);
  }
  std::vector<const SparseMatrix*> ptrs;
  for (const auto& m : owned) ptrs.push_back(&m);
  return linear_combination(coeffs, ptrs);
}

SparseMatrix HighFidelityModel::restrict_with_multiplier(const SparseMatrix& full) const {
  const int nu = velocity_dofs(), np = pressure_dofs();
  const int nr = static_cast<int>(free_.size()) + np;
  std::vector<Triplet> t;
  t.reserve(full.nnz() + 2 * static_cast<std::size_t>(np));
  for (int r = 0; r < full.rows(); ++r) {
    const int rr = reduced_index_[static_cast<std::size_t>(r)];
    if (rr < 0) continue;
    for (int p = full.row_offsets()[static_cast<std::size_t>(r)]; p < full.row_offsets()[static_cast<std::size_t>(r) + 1]; ++p) {
      const int cc = reduced_index_[static_cast<std::size_t>(full.column_indices()[static_cast<std::size_t>(p)])];
      if (cc >= 0) t.push_back({rr, cc, full.values()[static_cast<std::size_t>(p)]});
    }
  }
  for (int k = 0; k < np; ++k) {
    const int idx = reduced_index_[static_cast<std::size_t>(nu + k)];
    t.push_back({idx, nr, mean_[k]});
    t.push_back({nr, idx, mean_[k]});
  }
  return SparseMatrix::from_triplets(nr + 1, nr + 1, std::move(t));
}

FeSolution HighFidelityModel::newton(Parameter mu, bool with_convection, const FeSolution* guess) const {
  const int nu = velocity_dofs(), np = pressure_dofs();
  const int nf = static_cast<int>(free_.size());
  const bool stab = stabilized();

  // Residual / Jacobian of the model restricted to the requested physics.
  const auto full_residual = [&](const Vector& W, const Vector& P) {
    if (with_convection || !nonlinear()) return residual(mu, W, P, stab);
    // Stokes part of a Navier-Stokes model: linear terms only.
    Vector x(nu + np);
    x << W, P;
    const double nu_ = this->nu(mu), a = scaling(mu);
    Vector r = Vector::Zero(nu + np);
    for (const auto& t : (stab ? system_stab_ : system_plain_).terms()) r += t.theta(nu_, a) * t.op.multiply(x);
    r.head(nu) -= body_momentum(mu, stab);
    r.tail(np) -= body_mass(mu, stab);
    return r;
  };
  const auto full_jacobian = [&](const Vector& W) {
    if (with_convection || !nonlinear()) return jacobian(mu, W, stab);
    return (stab ? system_stab_ : system_plain_).evaluate(this->nu(mu), scaling(mu));
  };
  const auto restricted = [&](const Vector& W, const Vector& P, double lambda) {
    const Vector r = full_residual(W, P);
    Vector out(nf + np + 1);
    for (int i = 0; i < nf; ++i) out[i] = r[free_[static_cast<std::size_t>(i)]];
    out.segment(nf, np) = r.tail(np) + lambda * mean_;
    out[nf + np] = mean_.dot(P);
    return out;
  };

  Vector W = guess ? guess->total_velocity() : lifting_.coefficients;
  Vector P = guess ? guess->pressure.coefficients : Vector::Zero(np);
  if (guess) {
    // Boundary values always come from this model's lifting.
    for (int d : Vh_->dirichlet_dofs()) W[d] = lifting_.coefficients[d];
  }
  double lambda = 0.0;

  const double ref = restricted(lifting_.coefficients, Vector::Zero(np), 0.0).norm();
  SolverDiagnostics diag;
  Vector r = restricted(W, P, lambda);
  const double scale = ref > 0.0 ? ref : 1.0;
  diag.residual_history.push_back(r.norm() / scale);

  // Zero data: one step confirms the (unique) zero root.
  const auto unconverged = [&] {
    if (ref == 0.0) return diag.iterations < 1 || r.norm() > 0.0;
    return r.norm() > kNewtonTolerance * ref;
  };
  while (unconverged()) {
    if (diag.iterations >= kMaxNewtonIterations) {
      std::ostringstream msg;
      msg << "Newton did not converge at mu = (" << mu.mu1 << ", " << mu.mu2 << ") after "
          << diag.iterations << " iterations; last relative residual " << diag.residual_history.back();
      throw NonConvergence(msg.str(), diag.residual_history);
    }
    const SparseLu lu(restrict_with_multiplier(full_jacobian(W)));
    const Vector d = lu.solve(Vector(-r));
    for (int i = 0; i < nf; ++i) W[free_[static_cast<std::size_t>(i)]] += d[i];
    P += d.segment(nf, np);
    lambda += d[nf + np];
    ++diag.iterations;
    r = restricted(W, P, lambda);
    diag.residual_history.push_back(r.norm() / scale);
    if (!std::isfinite(r.norm())) {
      throw NonConvergence("Newton diverged (non-finite residual)", diag.residual_history);
    }
  }
  diag.final_residual = diag.residual_history.back();

  FeSolution s;
  s.mu = mu;
  s.lifting = lifting_;
  s.velocity = FeFunction(Vh_, Vector(W - lifting_.coefficients));
  s.pressure = FeFunction(Qh_, P);
  s.diagnostics = diag;
  return s;
}

FeSolution HighFidelityModel::solve_stokes(Parameter mu) const { return newton(mu, false, nullptr); }

FeSolution HighFidelityModel::solve_navier_stokes(Parameter mu, const FeSolution* initial_guess) const {
  if (!nonlinear()) return solve_stokes(mu);
  if (initial_guess) return newton(mu, true, initial_guess);
  const FeSolution stokes = newton(mu, false, nullptr);
  return newton(mu, true, &stokes);
}

FeSolution HighFidelityModel::solve_navier_stokes_continuation(Parameter mu, int steps) const {
  if (steps < 1) throw InvalidArgument("continuation: need at least one step");
  const double re = mu.mu1;
  const double re0 = std::min(re, 10.0);
  std::optional<FeSolution> current;
  int total = 0;
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 1.0 : static_cast<double>(i) / (steps - 1);
    const Parameter mi{re0 * std::pow(re / re0, t), mu.mu2};
    current = current ? newton(mi, true, &*current) : solve_navier_stokes(mi);
    total += current->diagnostics.iterations;
  }
  current->diagnostics.continuation_steps = steps;
  current->diagnostics.iterations = total;
  current->mu = mu;
  return *current;
}

FeSolution HighFidelityModel::solve(Parameter mu) const {
  if (!nonlinear()) return solve_stokes(mu);
  try {
    return solve_navier_stokes(mu);
  } catch (const NonConvergence&) {
    return solve_navier_stokes_continuation(mu);
  }
}

Vector HighFidelityModel::supremizer(Parameter mu, const Vector& pressure) const {
  if (pressure.size() != pressure_dofs()) throw InvalidArgument("supremizer: pressure size mismatch");
  const SparseMatrix B = B_.evaluate(nu(mu), scaling(mu));
  const Vector rhs_full = B.multiply_transpose(pressure);
  Vector rhs(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t i = 0; i < free_.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = rhs_full[free_[i]];
  const Vector s_free = xu_free_lu_->solve(rhs);
  Vector s = Vector::Zero(velocity_dofs());
  for (std::size_t i = 0; i < free_.size(); ++i) s[free_[i]] = s_free[static_cast<Eigen::Index>(i)];
  return s;
}

}  // namespace stabrb
