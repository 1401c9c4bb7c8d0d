#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

#include "stabrb/errors.hpp"
#include "stabrb/rb.hpp"

using namespace stabrb;

namespace {

ProblemConfig small_stokes() {
  ProblemConfig c;
  c.pair = FePair::P1P1;
  c.stabilization = {Method::ResidualBased, 0, 0.05, true};
  c.nx = 12;
  c.ny = 6;
  return c;
}

ProblemConfig small_ns() {
  ProblemConfig c;
  c.problem = Problem::NavierStokes;
  c.pair = FePair::P2P2;
  c.stabilization = {Method::SupgFamily, 0, 1.0, true};
  c.box = {100, 200, 1.5, 3};
  c.nx = 6;
  c.ny = 3;
  return c;
}

struct Fixture {
  HighFidelityModel hf;
  OfflineResult off;
  Fixture(const ProblemConfig& c, int n, int train) : hf(c), off(greedy_offline(hf, {n, train, 3, 1})) {}
};

const Fixture& stokes_fixture() {
  static const Fixture f(small_stokes(), 5, 25);
  return f;
}

const Fixture& p2_fixture() {
  static const Fixture f(
      [] {
        auto c = small_stokes();
        c.pair = FePair::P2P2;
        c.stabilization.delta = 0.5;
        c.nx = 6;
        c.ny = 3;
        return c;
      }(),
      3, 9);
  return f;
}

const Fixture& ns_fixture() {
  static const Fixture f(small_ns(), 3, 9);
  return f;
}

double rel(const SparseMatrix& X, const Vector& a, const Vector& b) {
  const Vector d = a - b;
  return std::sqrt(d.dot(X.multiply(d)) / b.dot(X.multiply(b)));
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

DenseMatrix eval(const std::vector<ReducedAffine>& ops, double nu, double a) {
  DenseMatrix m = DenseMatrix::Zero(ops.front().m.rows(), ops.front().m.cols());
  for (const auto& t : ops) m += t.theta(nu, a) * t.m;
  return m;
}

DenseMatrix trial_basis(const ReducedModel& m) {
  DenseMatrix W(m.Zu.rows(), m.trial_size());
  W.col(0) = m.lifting;
  W.middleCols(1, m.n_u) = m.Zu;
  W.rightCols(m.n_s) = m.Zs;
  return W;
}

}  // namespace

TEST(Sampling, TrainingSetDeterministicInBox) {
  const ParameterBox box{0.25, 0.75, 1, 3};
  const auto a = training_set(box, 100, 9), b = training_set(box, 100, 9), c = training_set(box, 100, 10);
  ASSERT_EQ(a.size(), 100u);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mu1, b[i].mu1);
    EXPECT_EQ(a[i].mu2, b[i].mu2);
    EXPECT_TRUE(box.contains(a[i]));
    differs |= a[i].mu1 != c[i].mu1;
  }
  EXPECT_TRUE(differs);
  // One point per cell of the 10 x 10 grid.
  for (int i = 0; i < 100; ++i) {
    const auto k = static_cast<std::size_t>(i);
    EXPECT_EQ(static_cast<int>((a[k].mu1 - 0.25) / 0.05), i / 10);
    EXPECT_EQ(static_cast<int>((a[k].mu2 - 1.0) / 0.2), i % 10);
  }
  EXPECT_EQ(uniform01(0), 0.0);
  EXPECT_LT(uniform01(~0ULL), 1.0);
  const auto r = random_parameters(box, 10, 4, {a[0]});
  EXPECT_EQ(r.size(), 10u);
}

TEST(Options, NamesRoundTrip) {
  for (Option o : {Option::I, Option::II, Option::III, Option::IV}) EXPECT_EQ(option_from_string(to_string(o)), o);
  EXPECT_EQ(option_from_string("ii"), Option::II);
  EXPECT_THROW(option_from_string("v"), InvalidArgument);
}

TEST(Greedy, TraceIsDistinctAndStartsAtCentre) {
  const auto& f = stokes_fixture();
  const auto& t = f.off.trace;
  ASSERT_EQ(t.selected.size(), 5u);
  EXPECT_EQ(t.selected[0].mu1, 0.5);
  EXPECT_EQ(t.selected[0].mu2, 2.0);
  for (std::size_t i = 0; i < t.selected.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      EXPECT_FALSE(t.selected[i].mu1 == t.selected[j].mu1 && t.selected[i].mu2 == t.selected[j].mu2);
  EXPECT_EQ(f.off.model.n_u, 5);
  EXPECT_EQ(f.off.model.n_s, 5);
  EXPECT_EQ(f.off.model.n_p, 5);
  EXPECT_EQ(t.stop_reason, "N_max reached");
}

TEST(Greedy, IndicatorVanishesAtSelected) {
  const auto& f = stokes_fixture();
  const OnlineSystem sys(f.off.model, Option::I);
  for (const auto& mu : f.off.trace.selected) EXPECT_LE(greedy_indicator(f.hf, f.off.model, sys, mu), 1e-8);
}

TEST(Greedy, InvalidNmax) {
  const auto& f = stokes_fixture();
  EXPECT_THROW(greedy_offline(f.hf, {0, 4, 1, 1}), InvalidArgument);
}

TEST(Basis, Orthonormal) {
  const auto& m = stokes_fixture().off.model;
  const auto& hf = stokes_fixture().hf;
  const DenseMatrix V = trial_basis(m).rightCols(m.velocity_size());
  EXPECT_LT((V.transpose() * hf.velocity_gram().multiply(V) - DenseMatrix::Identity(10, 10)).norm(), 1e-10);
  EXPECT_LT((m.Zp.transpose() * hf.pressure_mass().multiply(m.Zp) - DenseMatrix::Identity(5, 5)).norm(), 1e-10);
  EXPECT_LT((m.xu - DenseMatrix::Identity(10, 10)).norm(), 1e-10);
}

TEST(Projection, AffineIdentities) {
  for (const Fixture* f : {&stokes_fixture(), &p2_fixture()}) {
    const auto& m = f->off.model;
    const DenseMatrix W = trial_basis(m);
    const DenseMatrix V = W.rightCols(m.velocity_size());
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    int checked = 0;
    for (int k = 0; k < 20; ++k) {
      const Parameter mu{0.25 + 0.5 * u(rng), 1 + 2 * u(rng)};
      const double nu = f->hf.nu(mu), a = f->hf.scaling(mu);
      const Vector w = random_vector(rng, m.trial_size()), v = random_vector(rng, m.velocity_size());
      const Vector q = random_vector(rng, m.n_p), r = random_vector(rng, m.n_p);
      const auto check = [&](const std::vector<ReducedAffine>& red, const AffineOperator<SparseMatrix>& full,
                             const Vector& left, const DenseMatrix& Zl, const Vector& right, const DenseMatrix& Zr) {
        ASSERT_EQ(red.size(), full.size());
        if (red.empty()) return;
        const double x = left.dot(eval(red, nu, a) * right);
        const double y = (Zl * left).dot(full.evaluate(nu, a).multiply(Vector(Zr * right)));
        EXPECT_NEAR(x, y, 1e-10 * std::max(1.0, std::abs(y)));
        ++checked;
      };
      const auto& s = f->hf.stabilization();
      check(m.a, f->hf.viscous(), v, V, w, W);
      check(m.b, f->hf.divergence(), q, m.Zp, w, W);
      check(m.spq, s.spq, r, m.Zp, q, m.Zp);
      check(m.spv, s.spv, v, V, q, m.Zp);
      check(m.suq, s.suq, q, m.Zp, w, W);
      check(m.suv, s.suv, v, V, w, W);
    }
    EXPECT_EQ(checked, f == &stokes_fixture() ? 60 : 80);  // rho = 0: no s^{uv}, s^{pv}
  }
}

TEST(Projection, TrilinearIdentities) {
  const auto& f = ns_fixture();
  const auto& m = f.off.model;
  const DenseMatrix W = trial_basis(m);
  const DenseMatrix V = W.rightCols(m.velocity_size());
  std::mt19937_64 rng(22);
  ASSERT_FALSE(m.c.empty());
  ASSERT_FALSE(m.tq.empty());
  for (int k = 0; k < 20; ++k) {
    const Parameter mu{100 + 100 * (k / 20.0), 1.5 + 1.5 * (k / 20.0)};
    const double nu = f.hf.nu(mu), a = f.hf.scaling(mu);
    const Vector w = random_vector(rng, m.trial_size()), z = random_vector(rng, m.trial_size());
    const Vector v = random_vector(rng, m.velocity_size()), q = random_vector(rng, m.n_p);
    double red = 0.0, red_q = 0.0;
    for (const auto& t : m.c) red += t.theta(nu, a) * v.dot(t.t.contract(w, z));
    for (const auto& t : m.tq) red_q += t.theta(nu, a) * q.dot(t.t.contract(w, z));
    const auto full_of = [&](const TrilinearOperator& op, const DenseMatrix& left, const Vector& x) {
      double sum = 0.0;
      for (std::size_t i = 0; i < op.size(); ++i)
        sum += op.terms()[i].theta(nu, a) * (left * x).dot(op.apply(i, W * w, W * z));
      return sum;
    };
    const double full = full_of(*f.hf.convection(), V, v);
    const double full_q = full_of(*f.hf.stabilization().tq, m.Zp, q);
    EXPECT_NEAR(red, full, 1e-10 * std::max(1.0, std::abs(full)));
    EXPECT_NEAR(red_q, full_q, 1e-10 * std::max(1.0, std::abs(full_q)));
  }
}

TEST(Supremizer, StoredSnapshotsSatisfyIdentity) {
  const auto& f = stokes_fixture();
  const auto& s = f.off.model.snapshots;
  std::mt19937_64 rng(23);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const SparseMatrix B = f.hf.divergence().evaluate(f.hf.nu(s.mu[n]), f.hf.scaling(s.mu[n]));
    for (int k = 0; k < 20; ++k) {
      Vector v = random_vector(rng, f.hf.velocity_dofs());
      for (int d : f.hf.velocity_space()->dirichlet_dofs()) v[d] = 0.0;
      const double lhs = s.supremizer[n].dot(f.hf.velocity_gram().multiply(v));
      const double rhs = s.pressure[n].dot(B.multiply(v));
      EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(std::abs(rhs), 1.0));
    }
  }
}

TEST(Online, SingleSnapshotReproduction) {
  const HighFidelityModel& hf = stokes_fixture().hf;
  const OfflineResult off = greedy_offline(hf, {1, 4, 3, 1});
  const Parameter mu = off.trace.selected[0];
  const FeSolution rb = reconstruct(hf, off.model, solve_reduced(off.model, Option::I, mu));
  const FeSolution fe = hf.solve(mu);
  EXPECT_LE(rel(hf.velocity_gram(), rb.velocity.coefficients, fe.velocity.coefficients), 1e-8);
  EXPECT_LE(rel(hf.pressure_mass(), rb.pressure.coefficients, fe.pressure.coefficients), 1e-8);
}

TEST(Online, ReproductionAndOfflineOnlyGap) {
  const auto& f = stokes_fixture();
  const auto& s = f.off.model.snapshots;
  for (std::size_t n = 0; n < s.size(); ++n) {
    for (Option o : {Option::I, Option::II}) {
      const FeSolution rb = reconstruct(f.hf, f.off.model, solve_reduced(f.off.model, o, s.mu[n]));
      EXPECT_LE(rel(f.hf.velocity_gram(), rb.velocity.coefficients, s.velocity[n]), 1e-8) << to_string(o);
      EXPECT_LE(rel(f.hf.pressure_mass(), rb.pressure.coefficients, s.pressure[n]), 1e-8) << to_string(o);
    }
    const FeSolution r3 = reconstruct(f.hf, f.off.model, solve_reduced(f.off.model, Option::III, s.mu[n]));
    EXPECT_GE(rel(f.hf.pressure_mass(), r3.pressure.coefficients, s.pressure[n]), 1e-4);
  }
}

TEST(Online, OptionFourIsSingularOrWorse) {
  const auto& f = stokes_fixture();
  const Parameter mu{0.6, 2.0};
  const FeSolution fe = f.hf.solve(mu);
  const FeSolution r2 = reconstruct(f.hf, f.off.model, solve_reduced(f.off.model, Option::II, mu));
  const double e2 = rel(f.hf.pressure_mass(), r2.pressure.coefficients, fe.pressure.coefficients);
  try {
    const FeSolution r4 = reconstruct(f.hf, f.off.model, solve_reduced(f.off.model, Option::IV, mu));
    EXPECT_GE(rel(f.hf.pressure_mass(), r4.pressure.coefficients, fe.pressure.coefficients), 10 * e2);
  } catch (const SingularMatrix& e) {
    EXPECT_NE(std::string(e.what()).find("option (iv)"), std::string::npos);
  }
}

TEST(Online, SystemSizes) {
  const auto& m = stokes_fixture().off.model;
  EXPECT_EQ(OnlineSystem(m, Option::I).velocity_size(), 10);
  EXPECT_EQ(OnlineSystem(m, Option::II).velocity_size(), 5);
  EXPECT_EQ(OnlineSystem(m, Option::III).velocity_size(), 10);
  EXPECT_EQ(OnlineSystem(m, Option::IV).velocity_size(), 5);
  EXPECT_EQ(OnlineSystem(m, Option::III).pressure_stabilization({0.5, 2}).norm(), 0.0);
  EXPECT_THROW(OnlineSystem(strip_supremizers(m), Option::I), InvalidArgument);
}

TEST(Enrichment, StripEnrichRoundTrip) {
  const auto& f = stokes_fixture();
  const auto& m = f.off.model;
  const ReducedModel stripped = strip_supremizers(m);
  EXPECT_EQ(stripped.n_s, 0);
  EXPECT_EQ(stripped.Zs.cols(), 0);
  const ReducedModel back = enrich_supremizers(f.hf, stripped);
  EXPECT_EQ(back.velocity_size(), 2 * m.n_p);
  const auto same = [](const std::vector<ReducedAffine>& x, const std::vector<ReducedAffine>& y) {
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_EQ(x[i].m.rows(), y[i].m.rows());
      ASSERT_EQ(x[i].m.cols(), y[i].m.cols());
      EXPECT_LE((x[i].m - y[i].m).norm(), 1e-12 * std::max(1.0, y[i].m.norm()));
    }
  };
  same(back.a, m.a);
  same(back.b, m.b);
  same(back.suv, m.suv);
  same(back.spv, m.spv);
  same(back.suq, m.suq);
  same(back.spq, m.spq);
  // Stripping slices exactly what option (ii) sees.
  const Parameter mu{0.6, 2.0};
  const auto s1 = solve_reduced(m, Option::II, mu), s2 = solve_reduced(stripped, Option::II, mu);
  EXPECT_LE((s1.u - s2.u).norm(), 1e-12 * s1.u.norm());
}

TEST(Enrichment, TruncationAtFullSizeIsBitwise) {
  const auto& f = stokes_fixture();
  const ReducedModel t = truncate(f.hf, f.off.model, 5);
  ASSERT_EQ(t.a.size(), f.off.model.a.size());
  for (std::size_t i = 0; i < t.a.size(); ++i) EXPECT_TRUE(t.a[i].m == f.off.model.a[i].m);
  for (std::size_t i = 0; i < t.b.size(); ++i) EXPECT_TRUE(t.b[i].m == f.off.model.b[i].m);
  const ReducedModel t3 = truncate(f.hf, f.off.model, 3);
  EXPECT_EQ(t3.n_u, 3);
  EXPECT_EQ(t3.n_s, 3);
  EXPECT_EQ(t3.n_p, 3);
}

TEST(InfSup, ModifiedHandCases) {
  const DenseMatrix I2 = DenseMatrix::Identity(2, 2);
  EXPECT_EQ(modified_infsup(DenseMatrix::Zero(2, 3), DenseMatrix::Identity(3, 3), I2, DenseMatrix::Zero(2, 2)), 0.0);
  DenseMatrix S(2, 2);
  S << 4.0, 1.0, 1.0, 3.0;
  const double lmin = Eigen::SelfAdjointEigenSolver<DenseMatrix>(S).eigenvalues().minCoeff();
  EXPECT_NEAR(modified_infsup(DenseMatrix::Zero(2, 3), DenseMatrix::Identity(3, 3), I2, S), std::sqrt(lmin), 1e-12);
  // S = 0 reduces to the ordinary inf-sup constant.
  DenseMatrix B(2, 3);
  B << 1, 2, 0, 0, 1, 3;
  EXPECT_NEAR(modified_infsup(B, DenseMatrix::Identity(3, 3), I2, DenseMatrix::Zero(2, 2)),
              smallest_gsv(B, DenseMatrix::Identity(3, 3), I2), 1e-12);
}

TEST(InfSup, SupremizersHelpAndModifiedIsPositive) {
  const auto& f = stokes_fixture();
  const OnlineSystem s1(f.off.model, Option::I), s2(f.off.model, Option::II), s4(f.off.model, Option::IV);
  for (const auto& mu : random_parameters(f.hf.config().box, 20, 5)) {
    EXPECT_GE(modified_infsup(s1, mu), modified_infsup(s2, mu) * (1 - 1e-10));
    EXPECT_GE(modified_infsup(s1, mu), 1e-6);
    EXPECT_GE(modified_infsup(s2, mu), 1e-6);
    EXPECT_GE(reduced_infsup(s1, mu), reduced_infsup(s4, mu) * (1 - 1e-10));
    EXPECT_NEAR(modified_infsup(s4, mu), reduced_infsup(s4, mu), 1e-10);
  }
}

TEST(Serialization, RoundTripIsBitFaithful) {
  for (const Fixture* f : {&stokes_fixture(), &ns_fixture()}) {
    std::ostringstream a;
    write_model(a, f->off.model);
    std::istringstream in(a.str());
    const ReducedModel m = read_model(in);
    std::ostringstream b;
    write_model(b, m);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_TRUE(m.Zu == f->off.model.Zu);
    EXPECT_TRUE(m.a[0].m == f->off.model.a[0].m);
    EXPECT_EQ(m.n_u, f->off.model.n_u);
    EXPECT_EQ(m.config.pair, f->off.model.config.pair);
  }
  std::istringstream bad("not a model\n");
  EXPECT_THROW(read_model(bad), InvalidArgument);
}

TEST(NavierStokesRb, Reproduction) {
  const auto& f = ns_fixture();
  const auto& s = f.off.model.snapshots;
  for (std::size_t n = 0; n < s.size(); ++n)
    for (Option o : {Option::I, Option::II}) {
      const FeSolution rb = reconstruct(f.hf, f.off.model, solve_reduced(f.off.model, o, s.mu[n]));
      EXPECT_LE(rel(f.hf.velocity_gram(), rb.velocity.coefficients, s.velocity[n]), 1e-6);
      EXPECT_LE(rel(f.hf.pressure_mass(), rb.pressure.coefficients, s.pressure[n]), 1e-6);
    }
}

TEST(NavierStokesRb, ReducedJacobianMatchesFiniteDifferences) {
  const OnlineSystem sys(ns_fixture().off.model, Option::I);
  std::mt19937_64 rng(24);
  const Parameter mu{150, 2};
  const Vector u = random_vector(rng, sys.velocity_size()), p = random_vector(rng, sys.pressure_size());
  const Vector du = random_vector(rng, sys.velocity_size()), dp = random_vector(rng, sys.pressure_size());
  Vector dx(du.size() + dp.size());
  dx << du, dp;
  const double eps = 1e-6;
  const Vector fd = (sys.residual(mu, u + eps * du, p + eps * dp, true) - sys.residual(mu, u - eps * du, p - eps * dp, true)) / (2 * eps);
  EXPECT_LE((sys.jacobian(mu, u, true) * dx - fd).norm(), 1e-7 * fd.norm());
}

TEST(NavierStokesRb, ZeroLidGivesZero) {
  auto c = small_ns();
  c.lid_speed = 0.0;
  const auto& m0 = ns_fixture().off.model;
  const HighFidelityModel hf(c);
  const ReducedModel z = build_reduced_model(hf, m0.snapshots);
  const ReducedSolution s = solve_reduced(z, Option::I, {150, 2});
  EXPECT_EQ(s.u.norm(), 0.0);
  EXPECT_EQ(s.p.norm(), 0.0);
}
