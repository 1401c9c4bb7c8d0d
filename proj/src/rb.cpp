#include "stabrb/rb.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "stabrb/errors.hpp"
#include "stabrb/parallel.hpp"

namespace stabrb {

std::string_view to_string(Option o) {
  switch (o) {
    case Option::I: return "i";
    case Option::II: return "ii";
    case Option::III: return "iii";
    case Option::IV: return "iv";
  }
  return "?";
}

Option option_from_string(std::string_view s) {
  if (s == "i") return Option::I;
  if (s == "ii") return Option::II;
  if (s == "iii") return Option::III;
  if (s == "iv") return Option::IV;
  throw InvalidArgument("unknown option '" + std::string(s) + "' (expected i, ii, iii or iv)");
}

namespace {

std::string option_tag(Option o) { return "option (" + std::string(to_string(o)) + ")"; }

std::vector<int> iota_vec(int begin, int end) {
  std::vector<int> v(static_cast<std::size_t>(std::max(0, end - begin)));
  std::iota(v.begin(), v.end(), begin);
  return v;
}

DenseMatrix take(const DenseMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  DenseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
  return out;
}

std::vector<ReducedAffine> take_all(const std::vector<ReducedAffine>& ops, const std::vector<int>& rows,
                                    const std::vector<int>& cols) {
  std::vector<ReducedAffine> out;
  for (const auto& t : ops) out.push_back({t.theta, take(t.m, rows, cols)});
  return out;
}

std::vector<ReducedTrilinear> take_all(const std::vector<ReducedTrilinear>& ops, const std::vector<int>& rows,
                                       const std::vector<int>& cols) {
  std::vector<ReducedTrilinear> out;
  for (const auto& t : ops) out.push_back({t.theta, t.t.slice(rows, cols, cols)});
  return out;
}

std::vector<ReducedAffine> project(const AffineOperator<SparseMatrix>& op, const DenseMatrix& left,
                                   const DenseMatrix& right) {
  std::vector<ReducedAffine> out;
  for (const auto& t : op.terms()) out.push_back({t.theta, left.transpose() * t.op.multiply(right)});
  return out;
}

std::vector<ReducedTrilinear> project(const TrilinearOperator& op, const DenseMatrix& left,
                                      const DenseMatrix& W, int threads) {
  const int n0 = static_cast<int>(left.cols()), n = static_cast<int>(W.cols());
  std::vector<ReducedTrilinear> out;
  for (std::size_t q = 0; q < op.size(); ++q) {
    DenseTensor3 t(n0, n, n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t j) {
      const DenseMatrix slab = left.transpose() * op.matrix(q, Vector(W.col(static_cast<Eigen::Index>(j))), Slot::Advecting).multiply(W);
      for (int i = 0; i < n0; ++i)
        for (int k = 0; k < n; ++k) t(i, static_cast<int>(j), k) = slab(i, k);
    });
    out.push_back({op.terms()[q].theta, std::move(t)});
  }
  return out;
}

DenseMatrix columns(const std::vector<Vector>& v, int rows) {
  DenseMatrix m(rows, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

}  // namespace

// ------------------------------------------------------------------ offline

ReducedModel build_reduced_model(const HighFidelityModel& hf, const Snapshots& snapshots, int n,
                                 std::vector<std::string>* dropped, int threads) {
  const int available = static_cast<int>(snapshots.size());
  if (n < 0) n = available;
  if (n > available) throw InvalidArgument("build_reduced_model: requested more snapshots than stored");
  if (snapshots.velocity.size() != snapshots.size() || snapshots.pressure.size() != snapshots.size() ||
      snapshots.supremizer.size() != snapshots.size()) {
    throw InvalidArgument("build_reduced_model: inconsistent snapshot arrays");
  }

  const int Nu = hf.velocity_dofs(), Np = hf.pressure_dofs();
  OrthonormalBasis bu(hf.velocity_gram()), bp(hf.pressure_mass()), bs(hf.velocity_gram());
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!bu.append(snapshots.velocity[k]) && dropped) dropped->push_back("velocity snapshot " + std::to_string(i));
    if (!bp.append(snapshots.pressure[k]) && dropped) dropped->push_back("pressure snapshot " + std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    if (!bs.append(snapshots.supremizer[static_cast<std::size_t>(i)], &bu.vectors()) && dropped)
      dropped->push_back("supremizer " + std::to_string(i));
  }

  ReducedModel m;
  m.config = hf.config();
  m.snapshots = snapshots;
  m.enriched = true;
  m.Zu = columns(bu.vectors(), Nu);
  m.Zs = columns(bs.vectors(), Nu);
  m.Zp = columns(bp.vectors(), Np);
  m.n_u = static_cast<int>(m.Zu.cols());
  m.n_s = static_cast<int>(m.Zs.cols());
  m.n_p = static_cast<int>(m.Zp.cols());
  m.lifting = hf.lifting().coefficients;

  DenseMatrix W(Nu, m.trial_size());
  W.col(0) = m.lifting;
  W.middleCols(1, m.n_u) = m.Zu;
  W.rightCols(m.n_s) = m.Zs;
  const DenseMatrix V = W.rightCols(m.velocity_size());

  m.a = project(hf.viscous(), V, W);
  m.b = project(hf.divergence(), m.Zp, W);
  if (hf.stabilized()) {
    const auto& s = hf.stabilization();
    m.suv = project(s.suv, V, W);
    m.spv = project(s.spv, V, m.Zp);
    m.suq = project(s.suq, m.Zp, W);
    m.spq = project(s.spq, m.Zp, m.Zp);
  }
  if (hf.nonlinear()) {
    m.c = project(*hf.convection(), V, W, threads);
    if (hf.stabilized()) {
      if (hf.stabilization().tq) m.tq = project(*hf.stabilization().tq, m.Zp, W, threads);
      if (hf.stabilization().tv) m.tv = project(*hf.stabilization().tv, V, W, threads);
    }
  }
  m.xu = V.transpose() * hf.velocity_gram().multiply(V);
  m.xp = m.Zp.transpose() * hf.pressure_mass().multiply(m.Zp);
  return m;
}

ReducedModel truncate(const HighFidelityModel& hf, const ReducedModel& model, int n, int threads) {
  ReducedModel out = build_reduced_model(hf, model.snapshots, n, nullptr, threads);
  out.snapshots = model.snapshots;
  out.seed = model.seed;
  return model.enriched ? out : strip_supremizers(out);
}

ReducedModel strip_supremizers(const ReducedModel& model) {
  ReducedModel m = model;
  const std::vector<int> vel = iota_vec(0, model.n_u);
  const std::vector<int> trial = iota_vec(0, model.n_u + 1);
  const std::vector<int> pres = iota_vec(0, model.n_p);
  m.a = take_all(model.a, vel, trial);
  m.b = take_all(model.b, pres, trial);
  m.suv = take_all(model.suv, vel, trial);
  m.spv = take_all(model.spv, vel, pres);
  m.suq = take_all(model.suq, pres, trial);
  m.spq = model.spq;
  m.c = take_all(model.c, vel, trial);
  m.tq = take_all(model.tq, pres, trial);
  m.tv = take_all(model.tv, vel, trial);
  m.xu = take(model.xu, vel, vel);
  m.Zs = DenseMatrix(model.Zu.rows(), 0);
  m.n_s = 0;
  m.enriched = false;
  return m;
}

ReducedModel enrich_supremizers(const HighFidelityModel& hf, const ReducedModel& model, int threads) {
  ReducedModel out = build_reduced_model(hf, model.snapshots, -1, nullptr, threads);
  out.seed = model.seed;
  return out;
}

// ------------------------------------------------------------------- online

OnlineSystem::OnlineSystem(const ReducedModel& model, Option option)
    : option_(option),
      problem_(model.config.problem),
      stabilized_(uses_stabilization(option) && model.config.stabilization.active()),
      n_p_(model.n_p) {
  if (uses_supremizers(option) && !model.enriched) {
    throw InvalidArgument(option_tag(option) + " needs a supremizer-enriched model");
  }
  vel_ = iota_vec(0, uses_supremizers(option) ? model.velocity_size() : model.n_u);
  trial_.push_back(0);
  for (int v : vel_) trial_.push_back(v + 1);
  const std::vector<int> pres = iota_vec(0, model.n_p);
  std::vector<int> trial_vel(trial_.begin() + 1, trial_.end());

  a_ = take_all(model.a, vel_, trial_);
  bm_ = take_all(model.b, pres, trial_);
  for (const auto& t : model.b) bt_.push_back({t.theta, take(t.m, pres, trial_vel).transpose()});
  c_ = take_all(model.c, vel_, trial_);
  if (stabilized_) {
    suv_ = take_all(model.suv, vel_, trial_);
    spv_ = take_all(model.spv, vel_, pres);
    suq_ = take_all(model.suq, pres, trial_);
    spq_ = model.spq;
    tq_ = take_all(model.tq, pres, trial_);
    tv_ = take_all(model.tv, vel_, trial_);
  }
  xu_ = take(model.xu, vel_, vel_);
  xp_ = model.xp;
}

namespace {

void accumulate(DenseMatrix& out, const std::vector<ReducedAffine>& ops, double sign, double nu, double a) {
  for (const auto& t : ops) out += sign * t.theta(nu, a) * t.m;
}

}  // namespace

Vector OnlineSystem::residual(Parameter mu, const Vector& u, const Vector& p, bool with_convection) const {
  const double nu = viscosity(problem_, mu), a = GeometryMap{}.scaling(mu.mu2);
  const int nv = velocity_size();
  Vector x(nv + 1);
  x << 1.0, u;
  Vector r = Vector::Zero(nv + n_p_);
  auto ru = r.head(nv);
  auto rp = r.tail(n_p_);
  for (const auto& t : a_) ru += t.theta(nu, a) * (t.m * x);
  for (const auto& t : bt_) ru += t.theta(nu, a) * (t.m * p);
  for (const auto& t : bm_) rp += t.theta(nu, a) * (t.m * x);
  for (const auto& t : suv_) ru -= t.theta(nu, a) * (t.m * x);
  for (const auto& t : spv_) ru -= t.theta(nu, a) * (t.m * p);
  for (const auto& t : suq_) rp -= t.theta(nu, a) * (t.m * x);
  for (const auto& t : spq_) rp -= t.theta(nu, a) * (t.m * p);
  if (with_convection) {
    for (const auto& t : c_) ru += t.theta(nu, a) * t.t.contract(x, x);
    for (const auto& t : tv_) ru -= t.theta(nu, a) * t.t.contract(x, x);
    for (const auto& t : tq_) rp -= t.theta(nu, a) * t.t.contract(x, x);
  }
  return r;
}

DenseMatrix OnlineSystem::jacobian(Parameter mu, const Vector& u, bool with_convection) const {
  const double nu = viscosity(problem_, mu), a = GeometryMap{}.scaling(mu.mu2);
  const int nv = velocity_size();
  Vector x(nv + 1);
  x << 1.0, u;
  DenseMatrix Juu = DenseMatrix::Zero(nv, nv + 1);  // includes the lifting column, dropped below
  DenseMatrix Jpu = DenseMatrix::Zero(n_p_, nv + 1);
  DenseMatrix Jup = DenseMatrix::Zero(nv, n_p_);
  DenseMatrix Jpp = DenseMatrix::Zero(n_p_, n_p_);
  accumulate(Juu, a_, 1.0, nu, a);
  accumulate(Juu, suv_, -1.0, nu, a);
  accumulate(Jup, bt_, 1.0, nu, a);
  accumulate(Jup, spv_, -1.0, nu, a);
  accumulate(Jpu, bm_, 1.0, nu, a);
  accumulate(Jpu, suq_, -1.0, nu, a);
  accumulate(Jpp, spq_, -1.0, nu, a);
  if (with_convection) {
    const auto lin = [&](DenseMatrix& J, const std::vector<ReducedTrilinear>& ops, double sign) {
      for (const auto& t : ops) J += sign * t.theta(nu, a) * (t.t.contract_first(x) + t.t.contract_second(x));
    };
    lin(Juu, c_, 1.0);
    lin(Juu, tv_, -1.0);
    lin(Jpu, tq_, -1.0);
  }
  DenseMatrix J(nv + n_p_, nv + n_p_);
  J << Juu.rightCols(nv), Jup, Jpu.rightCols(nv), Jpp;
  return J;
}

ReducedSolution OnlineSystem::solve(Parameter mu) const {
  const int nv = velocity_size();
  ReducedSolution s;
  s.option = option_;
  s.mu = mu;
  s.u = Vector::Zero(nv);
  s.p = Vector::Zero(n_p_);

  const auto step = [&](bool convection) {
    const DenseMatrix J = jacobian(mu, s.u, convection);
    const Vector r = residual(mu, s.u, s.p, convection);
    Vector d;
    try {
      d = dense_solve(J, Vector(-r), "reduced system");
    } catch (const SingularMatrix& e) {
      throw SingularMatrix(option_tag(option_) + ": " + e.what(), e.pivot());
    }
    s.u += d.head(nv);
    s.p += d.tail(n_p_);
  };

  const bool nonlinear = problem_ == Problem::NavierStokes;
  const double ref = residual(mu, s.u, s.p, nonlinear).norm();
  if (ref == 0.0) {
    s.residual_history.push_back(0.0);
    return s;
  }
  if (nonlinear) step(false);  // reduced Stokes initial guess
  double r = residual(mu, s.u, s.p, nonlinear).norm();
  s.residual_history.push_back(r / ref);
  while (r > kTolerance * ref) {
    if (s.iterations >= kMaxIterations || !std::isfinite(r)) {
      std::ostringstream msg;
      msg << option_tag(option_) << ": reduced Newton did not converge at mu = (" << mu.mu1 << ", " << mu.mu2
          << "); last relative residual " << s.residual_history.back();
      throw NonConvergence(msg.str(), s.residual_history);
    }
    step(nonlinear);
    ++s.iterations;
    r = residual(mu, s.u, s.p, nonlinear).norm();
    s.residual_history.push_back(r / ref);
    if (!nonlinear) break;  // linear: a single solve is exact up to round-off
  }
  return s;
}

DenseMatrix OnlineSystem::divergence(Parameter mu) const {
  const double nu = viscosity(problem_, mu), a = GeometryMap{}.scaling(mu.mu2);
  DenseMatrix B = DenseMatrix::Zero(n_p_, velocity_size());
  for (const auto& t : bt_) B += t.theta(nu, a) * t.m.transpose();
  return B;
}

DenseMatrix OnlineSystem::velocity_gram() const { return xu_; }
DenseMatrix OnlineSystem::pressure_gram() const { return xp_; }

DenseMatrix OnlineSystem::pressure_stabilization(Parameter mu) const {
  const double nu = viscosity(problem_, mu), a = GeometryMap{}.scaling(mu.mu2);
  DenseMatrix S = DenseMatrix::Zero(n_p_, n_p_);
  accumulate(S, spq_, 1.0, nu, a);
  return S;
}

FeSolution reconstruct(const HighFidelityModel& hf, const ReducedModel& model, const ReducedSolution& s) {
  const int nv = static_cast<int>(s.u.size());
  if (nv != model.n_u && nv != model.velocity_size()) throw InvalidArgument("reconstruct: size mismatch");
  Vector w = model.Zu * s.u.head(model.n_u);
  if (nv > model.n_u) w += model.Zs * s.u.tail(nv - model.n_u);
  FeSolution out;
  out.mu = s.mu;
  out.lifting = hf.lifting();
  out.velocity = FeFunction(hf.velocity_space(), w);
  out.pressure = FeFunction(hf.pressure_space(), Vector(model.Zp * s.p));
  out.diagnostics.iterations = s.iterations;
  out.diagnostics.residual_history = s.residual_history;
  out.diagnostics.final_residual = s.residual_history.empty() ? 0.0 : s.residual_history.back();
  return out;
}

ReducedSolution solve_reduced(const ReducedModel& model, Option option, Parameter mu) {
  return OnlineSystem(model, option).solve(mu);
}

double reduced_infsup(const OnlineSystem& sys, Parameter mu) {
  return smallest_gsv(sys.divergence(mu), sys.velocity_gram(), sys.pressure_gram());
}

double modified_infsup(const DenseMatrix& B, const DenseMatrix& Xu, const DenseMatrix& Xp, const DenseMatrix& S) {
  const Eigen::Index np = Xp.rows();
  if (np == 0) return 0.0;
  if (B.rows() != np || B.cols() != Xu.rows() || S.rows() != np || S.cols() != np)
    throw InvalidArgument("modified_infsup: shape mismatch");
  DenseMatrix M1 = DenseMatrix::Zero(np, np);
  if (Xu.rows() > 0) {
    const Eigen::LLT<DenseMatrix> llt(Xu);
    if (llt.info() != Eigen::Success) throw InvalidArgument("modified_infsup: X_u not positive definite");
    M1 = B * llt.solve(B.transpose());
  }
  M1 = 0.5 * (M1 + M1.transpose());
  const DenseMatrix Ss = 0.5 * (S + S.transpose());
  const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(M1 + Ss, Xp);
  if (es.info() != Eigen::Success) throw InvalidArgument("modified_infsup: eigensolver failed");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < np; ++k) {
    const Vector q = es.eigenvectors().col(k);
    const double norm = std::sqrt(q.dot(Xp * q));
    const double v = std::sqrt(std::max(0.0, q.dot(M1 * q))) + std::sqrt(std::max(0.0, q.dot(Ss * q)));
    best = std::min(best, v / norm);
  }
  return best;
}

double modified_infsup(const OnlineSystem& sys, Parameter mu) {
  return modified_infsup(sys.divergence(mu), sys.velocity_gram(), sys.pressure_gram(),
                         sys.pressure_stabilization(mu));
}

// ------------------------------------------------------------------- greedy

double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<Parameter> training_set(const ParameterBox& box, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("training set size must be >= 1");
  const int g1 = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int g2 = (count + g1 - 1) / g1;
  std::mt19937_64 rng(seed);
  const double w1 = (box.mu1_max - box.mu1_min) / g1, w2 = (box.mu2_max - box.mu2_min) / g2;
  std::vector<Parameter> out;
  for (int c = 0; c < count; ++c) {
    const int i = c / g2, j = c % g2;
    const double u1 = uniform01(rng()), u2 = uniform01(rng());
    out.push_back({box.mu1_min + (i + u1) * w1, box.mu2_min + (j + u2) * w2});
  }
  return out;
}

std::vector<Parameter> random_parameters(const ParameterBox& box, int count, std::uint64_t seed,
                                         const std::vector<Parameter>& exclude) {
  std::mt19937_64 rng(seed);
  std::vector<Parameter> out;
  while (static_cast<int>(out.size()) < count) {
    const double u1 = uniform01(rng()), u2 = uniform01(rng());
    const Parameter p{box.mu1_min + u1 * (box.mu1_max - box.mu1_min), box.mu2_min + u2 * (box.mu2_max - box.mu2_min)};
    const bool clash = std::any_of(exclude.begin(), exclude.end(),
                                   [&](const Parameter& e) { return e.mu1 == p.mu1 && e.mu2 == p.mu2; });
    if (!clash) out.push_back(p);
  }
  return out;
}

double greedy_indicator(const HighFidelityModel& hf, const ReducedModel& model, const OnlineSystem& sys,
                        Parameter mu) {
  try {
    const FeSolution s = reconstruct(hf, model, sys.solve(mu));
    const double r = hf.relative_residual(mu, s.total_velocity(), s.pressure.coefficients);
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  } catch (const SingularMatrix&) {
    return std::numeric_limits<double>::infinity();
  } catch (const NonConvergence&) {
    return std::numeric_limits<double>::infinity();
  }
}

OfflineResult greedy_offline(const HighFidelityModel& hf, const GreedyOptions& options) {
  if (options.n_max < 1) throw InvalidArgument("greedy: N_max must be >= 1");
  const ParameterBox& box = hf.config().box;
  OfflineResult res;
  res.trace.seed = options.seed;
  res.trace.training = training_set(box, options.train_size, options.seed);

  Snapshots snaps;
  Parameter next = box.center();
  double next_indicator = 1.0;  // empty basis: the reconstruction is the lifting alone
  for (int n = 0; n < options.n_max; ++n) {
    for (const Parameter& s : res.trace.selected) {
      if (s.mu1 == next.mu1 && s.mu2 == next.mu2) {
        std::ostringstream msg;
        msg << "greedy: parameter (" << next.mu1 << ", " << next.mu2 << ") selected twice at iteration " << n;
        throw InvalidArgument(msg.str());
      }
    }
    FeSolution fe;
    try {
      fe = hf.solve(next);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "greedy: FE solve failed at mu = (" << next.mu1 << ", " << next.mu2 << "): " << e.what();
      throw NonConvergence(msg.str(), {});
    }
    res.trace.selected.push_back(next);
    res.trace.max_indicator.push_back(next_indicator);
    snaps.mu.push_back(next);
    snaps.velocity.push_back(fe.velocity.coefficients);
    snaps.pressure.push_back(fe.pressure.coefficients);
    snaps.supremizer.push_back(hf.supremizer(next, fe.pressure.coefficients));

    std::vector<std::string> dropped;
    ReducedModel model = build_reduced_model(hf, snaps, -1, &dropped, options.threads);
    model.seed = options.seed;
    for (const auto& d : dropped) res.trace.notes.push_back("iteration " + std::to_string(n) + ": dropped " + d);
    if (!dropped.empty()) {
      // Keep N_u = N_s = N_p: discard the dependent snapshot and stop.
      snaps.mu.pop_back();
      snaps.velocity.pop_back();
      snaps.pressure.pop_back();
      snaps.supremizer.pop_back();
      res.trace.selected.pop_back();
      res.trace.max_indicator.pop_back();
      res.model = build_reduced_model(hf, snaps, -1, nullptr, options.threads);
      res.model.seed = options.seed;
      res.trace.stop_reason = "dependent snapshot";
      return res;
    }
    res.model = std::move(model);
    if (n + 1 == options.n_max) break;

    const OnlineSystem sys(res.model, Option::I);
    std::vector<double> ind(res.trace.training.size());
    parallel_for(ind.size(), options.threads,
                 [&](std::size_t i) { ind[i] = greedy_indicator(hf, res.model, sys, res.trace.training[i]); });
    const auto it = std::max_element(ind.begin(), ind.end());  // first maximum: deterministic
    next = res.trace.training[static_cast<std::size_t>(it - ind.begin())];
    next_indicator = *it;
  }
  res.trace.stop_reason = "N_max reached";
  return res;
}

// ------------------------------------------------------------ serialisation

namespace {

void write_number(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

void write_matrix(std::ostream& out, const std::string& name, const DenseMatrix& m) {
  out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      write_number(out, m(i, j));
    }
    out << '\n';
  }
}

void write_theta(std::ostream& out, const Monomial& t) {
  out << "theta ";
  write_number(out, t.scale);
  out << ' ' << t.nu_power << ' ' << t.a_power << '\n';
}

void write_affine(std::ostream& out, const std::string& name, const std::vector<ReducedAffine>& ops) {
  out << "affine " << name << ' ' << ops.size() << '\n';
  for (std::size_t q = 0; q < ops.size(); ++q) {
    write_theta(out, ops[q].theta);
    write_matrix(out, name + "_" + std::to_string(q), ops[q].m);
  }
}

void write_trilinear(std::ostream& out, const std::string& name, const std::vector<ReducedTrilinear>& ops) {
  out << "trilinear " << name << ' ' << ops.size() << '\n';
  for (std::size_t q = 0; q < ops.size(); ++q) {
    const auto& t = ops[q].t;
    write_theta(out, ops[q].theta);
    out << "tensor " << name << '_' << q << ' ' << t.dim(0) << ' ' << t.dim(1) << ' ' << t.dim(2) << '\n';
    const std::size_t row = static_cast<std::size_t>(t.dim(1)) * static_cast<std::size_t>(t.dim(2));
    for (int i = 0; i < t.dim(0); ++i) {
      for (std::size_t j = 0; j < row; ++j) {
        if (j) out << ' ';
        write_number(out, t.data()[static_cast<std::size_t>(i) * row + j]);
      }
      out << '\n';
    }
  }
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw InvalidArgument("model file: unexpected end of input");
    return w;
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) throw InvalidArgument("model file: expected '" + w + "', found '" + got + "'");
  }
  double number() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end == w.c_str() || *end != '\0') throw InvalidArgument("model file: bad number '" + w + "'");
    return v;
  }
  long integer() {
    const std::string w = word();
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(w, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != w.size() || w.empty()) throw InvalidArgument("model file: bad integer '" + w + "'");
    return v;
  }
  /// "key = value" header line.
  std::string header(const std::string& key) {
    expect(key);
    expect("=");
    return word();
  }
  DenseMatrix matrix(const std::string& name) {
    expect("matrix");
    expect(name);
    const long r = integer(), c = integer();
    if (r < 0 || c < 0) throw InvalidArgument("model file: negative shape for " + name);
    DenseMatrix m(r, c);
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) m(i, j) = number();
    return m;
  }
  Monomial theta() {
    expect("theta");
    Monomial t;
    t.scale = number();
    t.nu_power = static_cast<int>(integer());
    t.a_power = static_cast<int>(integer());
    return t;
  }
  std::vector<ReducedAffine> affine(const std::string& name) {
    expect("affine");
    expect(name);
    const long n = integer();
    std::vector<ReducedAffine> out;
    for (long q = 0; q < n; ++q) {
      const Monomial t = theta();
      out.push_back({t, matrix(name + "_" + std::to_string(q))});
    }
    return out;
  }
  std::vector<ReducedTrilinear> trilinear(const std::string& name) {
    expect("trilinear");
    expect(name);
    const long n = integer();
    std::vector<ReducedTrilinear> out;
    for (long q = 0; q < n; ++q) {
      const Monomial t = theta();
      expect("tensor");
      expect(name + "_" + std::to_string(q));
      const int n0 = static_cast<int>(integer()), n1 = static_cast<int>(integer()), n2 = static_cast<int>(integer());
      DenseTensor3 tensor(n0, n1, n2);
      for (auto& v : tensor.data()) v = number();
      out.push_back({t, std::move(tensor)});
    }
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const ReducedModel& m) {
  const auto kv = [&](const char* key, auto value) { out << key << " = " << value << '\n'; };
  const auto kvd = [&](const char* key, double value) {
    out << key << " = ";
    write_number(out, value);
    out << '\n';
  };
  out << "stabrb-reduced-model = 1\n";
  kv("problem", to_string(m.config.problem));
  kv("fe_pair", to_string(m.config.pair));
  kv("method", to_string(m.config.stabilization.method));
  kv("rho", m.config.stabilization.rho);
  kvd("delta", m.config.stabilization.delta);
  kv("apply_online", m.config.stabilization.apply_online ? 1 : 0);
  kv("enriched", m.enriched ? 1 : 0);
  kv("N_u", m.n_u);
  kv("N_s", m.n_s);
  kv("N_p", m.n_p);
  kv("Q_a", m.a.size());
  kv("Q_b", m.b.size());
  kv("Q_suv", m.suv.size());
  kv("Q_spv", m.spv.size());
  kv("Q_suq", m.suq.size());
  kv("Q_spq", m.spq.size());
  kv("Q_c", m.c.size());
  kv("Q_tq", m.tq.size());
  kv("Q_tv", m.tv.size());
  kvd("mu_bar2", m.config.mu_bar2);
  kvd("mu1_min", m.config.box.mu1_min);
  kvd("mu1_max", m.config.box.mu1_max);
  kvd("mu2_min", m.config.box.mu2_min);
  kvd("mu2_max", m.config.box.mu2_max);
  kv("nx", m.config.nx);
  kv("ny", m.config.ny);
  kvd("lid_speed", m.config.lid_speed);
  kv("seed", m.seed);
  kv("snapshots", m.snapshots.size());

  write_matrix(out, "Zu", m.Zu);
  write_matrix(out, "Zs", m.Zs);
  write_matrix(out, "Zp", m.Zp);
  write_matrix(out, "lifting", m.lifting);
  write_affine(out, "a", m.a);
  write_affine(out, "b", m.b);
  write_affine(out, "suv", m.suv);
  write_affine(out, "spv", m.spv);
  write_affine(out, "suq", m.suq);
  write_affine(out, "spq", m.spq);
  write_trilinear(out, "c", m.c);
  write_trilinear(out, "tq", m.tq);
  write_trilinear(out, "tv", m.tv);
  write_matrix(out, "xu", m.xu);
  write_matrix(out, "xp", m.xp);

  const auto stack = [](const std::vector<Vector>& v) {
    DenseMatrix s(v.empty() ? 0 : v.front().size(), static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) s.col(static_cast<Eigen::Index>(i)) = v[i];
    return s;
  };
  DenseMatrix mus(static_cast<Eigen::Index>(m.snapshots.size()), 2);
  for (std::size_t i = 0; i < m.snapshots.size(); ++i) {
    mus(static_cast<Eigen::Index>(i), 0) = m.snapshots.mu[i].mu1;
    mus(static_cast<Eigen::Index>(i), 1) = m.snapshots.mu[i].mu2;
  }
  write_matrix(out, "snapshot_mu", mus);
  write_matrix(out, "snapshot_velocity", stack(m.snapshots.velocity));
  write_matrix(out, "snapshot_pressure", stack(m.snapshots.pressure));
  write_matrix(out, "snapshot_supremizer", stack(m.snapshots.supremizer));
  if (!out) throw InvalidArgument("write_model: stream error");
}

ReducedModel read_model(std::istream& in) {
  Reader r(in);
  if (r.header("stabrb-reduced-model") != "1") throw InvalidArgument("model file: unsupported format version");
  ReducedModel m;
  m.config.problem = problem_from_string(r.header("problem"));
  m.config.pair = fe_pair_from_string(r.header("fe_pair"));
  m.config.stabilization.method = method_from_string(r.header("method"));
  m.config.stabilization.rho = std::stoi(r.header("rho"));
  m.config.stabilization.delta = std::strtod(r.header("delta").c_str(), nullptr);
  m.config.stabilization.apply_online = r.header("apply_online") == "1";
  m.enriched = r.header("enriched") == "1";
  m.n_u = std::stoi(r.header("N_u"));
  m.n_s = std::stoi(r.header("N_s"));
  m.n_p = std::stoi(r.header("N_p"));
  for (const char* q : {"Q_a", "Q_b", "Q_suv", "Q_spv", "Q_suq", "Q_spq", "Q_c", "Q_tq", "Q_tv"}) r.header(q);
  m.config.mu_bar2 = std::strtod(r.header("mu_bar2").c_str(), nullptr);
  m.config.box.mu1_min = std::strtod(r.header("mu1_min").c_str(), nullptr);
  m.config.box.mu1_max = std::strtod(r.header("mu1_max").c_str(), nullptr);
  m.config.box.mu2_min = std::strtod(r.header("mu2_min").c_str(), nullptr);
  m.config.box.mu2_max = std::strtod(r.header("mu2_max").c_str(), nullptr);
  m.config.nx = std::stoi(r.header("nx"));
  m.config.ny = std::stoi(r.header("ny"));
  m.config.lid_speed = std::strtod(r.header("lid_speed").c_str(), nullptr);
  m.seed = std::stoull(r.header("seed"));
  const long n_snap = std::stol(r.header("snapshots"));

  m.Zu = r.matrix("Zu");
  m.Zs = r.matrix("Zs");
  m.Zp = r.matrix("Zp");
  m.lifting = r.matrix("lifting");
  m.a = r.affine("a");
  m.b = r.affine("b");
  m.suv = r.affine("suv");
  m.spv = r.affine("spv");
  m.suq = r.affine("suq");
  m.spq = r.affine("spq");
  m.c = r.trilinear("c");
  m.tq = r.trilinear("tq");
  m.tv = r.trilinear("tv");
  m.xu = r.matrix("xu");
  m.xp = r.matrix("xp");
  const DenseMatrix mus = r.matrix("snapshot_mu");
  const DenseMatrix sv = r.matrix("snapshot_velocity");
  const DenseMatrix sp = r.matrix("snapshot_pressure");
  const DenseMatrix ss = r.matrix("snapshot_supremizer");
  if (mus.rows() != n_snap || sv.cols() != n_snap || sp.cols() != n_snap || ss.cols() != n_snap)
    throw InvalidArgument("model file: snapshot count mismatch");
  for (long i = 0; i < n_snap; ++i) {
    m.snapshots.mu.push_back({mus(i, 0), mus(i, 1)});
    m.snapshots.velocity.push_back(sv.col(i));
    m.snapshots.pressure.push_back(sp.col(i));
    m.snapshots.supremizer.push_back(ss.col(i));
  }
  if (m.Zu.cols() != m.n_u || m.Zs.cols() != m.n_s || m.Zp.cols() != m.n_p)
    throw InvalidArgument("model file: basis sizes disagree with the header");
  m.config.validate();
  return m;
}

}  // namespace stabrb
