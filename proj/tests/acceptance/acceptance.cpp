// Acceptance run: one PASS/FAIL line per criterion. `acceptance 3 5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "stabrb/analysis.hpp"
#include "stabrb/errors.hpp"
#include "stabrb/io.hpp"
#include "stabrb/parallel.hpp"
#include "stabrb/rb.hpp"

using namespace stabrb;

namespace {

constexpr std::uint64_t kSeed = 2024;
const Parameter kStokesOnline{0.6, 2.0};
const Parameter kNsOnline{120.0, 2.0};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int threads() { return default_threads(); }

ProblemConfig stokes_config(FePair pair, StabilizationConfig stab) {
  ProblemConfig c;
  c.problem = Problem::Stokes;
  c.pair = pair;
  c.stabilization = stab;
  c.box = {0.25, 0.75, 1, 3};
  c.nx = 32;
  c.ny = 16;
  return c;
}

ProblemConfig ns_config() {
  ProblemConfig c;
  c.problem = Problem::NavierStokes;
  c.pair = FePair::P2P2;
  c.stabilization = {Method::SupgFamily, 0, 1.0, true};
  c.box = {100, 200, 1.5, 3};
  c.nx = 32;
  c.ny = 16;
  return c;
}

struct Built {
  std::unique_ptr<HighFidelityModel> hf;
  OfflineResult off;
  double offline_seconds = 0.0;
};

Built build(const ProblemConfig& c, int n_max, int train) {
  Built b;
  const auto t0 = std::chrono::steady_clock::now();
  b.hf = std::make_unique<HighFidelityModel>(c);
  b.off = greedy_offline(*b.hf, {n_max, train, kSeed, threads()});
  b.offline_seconds = seconds_since(t0);
  return b;
}

// Lazily built models shared by several criteria.
const Built& p1p1() {
  static const Built b = build(stokes_config(FePair::P1P1, {Method::ResidualBased, 0, 0.05, true}), 20, 100);
  return b;
}
const Built& p2p2(double delta) {
  static std::map<double, Built> cache;
  auto it = cache.find(delta);
  if (it == cache.end())
    it = cache.emplace(delta, build(stokes_config(FePair::P2P2, {Method::ResidualBased, 0, delta, true}), 20, 100)).first;
  return it->second;
}
const Built& p1p0() {
  static const Built b = build(stokes_config(FePair::P1P0, {Method::EdgeJumpP1P0, 0, 0.1, true}), 20, 100);
  return b;
}
const Built& p2p1() {
  static const Built b = build(stokes_config(FePair::P2P1, {Method::None, 0, 0.0, true}), 20, 100);
  return b;
}
const Built& ns() {
  static const Built b = build(ns_config(), 16, 64);
  return b;
}

/// RB (option) vs FE truth at mu; +inf on reduced failure.
FieldErrors rb_error(const Built& b, Option option, Parameter mu, const FeSolution& truth) {
  try {
    const ReducedSolution rs = OnlineSystem(b.off.model, option).solve(mu);
    return relative_errors(*b.hf, reconstruct(*b.hf, b.off.model, rs), truth);
  } catch (const std::runtime_error&) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf};
  }
}

std::vector<Parameter> test_set(const Built& b, int count) {
  return make_test_set(b.hf->config().box, count, kSeed + 1, b.off.trace.selected);
}

// ----------------------------------------------------------------- criteria

Outcome c1_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::array<int, 2>> meshes{{8, 4}, {16, 8}, {32, 16}, {64, 32}};
  const auto th = convergence_study(FePair::P2P1, {Method::None, 0, 0.0, true}, meshes);
  const auto bp = convergence_study(FePair::P1P1, {Method::ResidualBased, 0, 0.05, true}, meshes);
  const double secs = seconds_since(t0);
  const auto min_of = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
  const auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double r : v) s += (s.empty() ? "" : "/") + fmt(r);
    return s;
  };
  const bool ok = min_of(th.velocity_rate) >= 1.9 && min_of(th.pressure_rate) >= 1.9 && min_of(bp.velocity_rate) >= 0.9 &&
                  min_of(bp.pressure_rate) >= 0.9 && secs <= 120;
  return {ok, "P2P1 rates u " + list(th.velocity_rate) + " p " + list(th.pressure_rate) + "; P1P1 u " +
                  list(bp.velocity_rate) + " p " + list(bp.pressure_rate) + "; " + fmt(secs) + " s (limit 120)"};
}

Outcome c2_reproduction() {
  const Built& b = p1p1();
  double worst = 0.0;
  const auto& picks = b.off.trace.selected;
  for (const Parameter& mu : picks) {
    const FeSolution truth = b.hf->solve(mu);
    for (Option o : {Option::I, Option::II}) {
      const FieldErrors e = rb_error(b, o, mu, truth);
      worst = std::max({worst, e.velocity, e.pressure});
    }
  }
  const bool ok = picks.size() == 20 && worst <= 1e-8 && b.offline_seconds <= 600;
  return {ok, std::to_string(picks.size()) + " training points, worst relative error " + fmt(worst) +
                  " (limit 1e-8); offline " + fmt(b.offline_seconds) + " s (limit 600)"};
}

struct OnlineErrors {
  FieldErrors i, ii, iii;
};

const OnlineErrors& stokes_online() {
  static const OnlineErrors e = [] {
    const Built& b = p1p1();
    const FeSolution truth = b.hf->solve(kStokesOnline);
    return OnlineErrors{rb_error(b, Option::I, kStokesOnline, truth), rb_error(b, Option::II, kStokesOnline, truth),
                        rb_error(b, Option::III, kStokesOnline, truth)};
  }();
  return e;
}

Outcome c3_accuracy() {
  const auto& e = stokes_online();
  const double worst = std::max({e.i.velocity, e.i.pressure, e.ii.velocity, e.ii.pressure});
  return {worst <= 1e-3, "mu=(0.6,2) N=20: (i) u " + fmt(e.i.velocity) + " p " + fmt(e.i.pressure) + "; (ii) u " +
                             fmt(e.ii.velocity) + " p " + fmt(e.ii.pressure) + " (limit 1e-3)"};
}

Outcome c4_offline_only() {
  const auto& e = stokes_online();
  const double ratio = e.iii.pressure / e.i.pressure;
  return {ratio >= 10, "pressure (iii) " + fmt(e.iii.pressure) + " / (i) " + fmt(e.i.pressure) + " = " + fmt(ratio) +
                           " (need >= 10)"};
}

Outcome c5_supremizer_benefit() {
  const Built& b = p1p1();
  SweepOptions o;
  o.n_values = {20};
  o.options = {Option::I, Option::II};
  o.test_set = test_set(b, 50);
  o.seed = kSeed;
  o.threads = threads();
  const ErrorReport rep = error_sweep(*b.hf, b.off.model, o);
  std::map<std::size_t, std::array<const PointError*, 2>> by_point;
  for (const auto& p : rep.points) by_point[p.point][p.option == Option::I ? 0 : 1] = &p;
  std::vector<double> pr, vr;
  for (const auto& [k, pair] : by_point) {
    pr.push_back(pair[1]->pressure / pair[0]->pressure);
    vr.push_back(pair[1]->velocity / pair[0]->velocity);
  }
  const double mp = median(pr), mv = median(vr);
  const bool ok = pr.size() == 50 && mp >= 3 && mv >= 0.3 && mv <= 3;
  return {ok, std::to_string(pr.size()) + " test points: median pressure ratio (ii)/(i) " + fmt(mp) +
                  " (need >= 3), velocity ratio " + fmt(mv) + " (need in [0.3, 3])"};
}

Outcome c6_p2p2_parity() {
  const std::vector<int> ns{4, 8, 12, 16, 20};
  std::map<std::pair<double, int>, std::array<double, 2>> mean_p;  // (delta, N) -> {(i), (ii)}
  for (double delta : {0.05, 0.5}) {
    const Built& b = p2p2(delta);
    SweepOptions o;
    o.n_values = ns;
    o.options = {Option::I, Option::II};
    o.test_set = test_set(b, 20);
    o.seed = kSeed;
    o.threads = threads();
    for (const auto& r : error_sweep(*b.hf, b.off.model, o).rows)
      if (r.field == "pressure") mean_p[{delta, r.n}][r.option == Option::I ? 0 : 1] = r.mean;
  }
  bool parity = true, stable = true;
  double worst_parity = 1.0, worst_delta = 1.0;
  for (const auto& [key, v] : mean_p) {
    const double r = std::max(v[0], v[1]) / std::min(v[0], v[1]);
    worst_parity = std::max(worst_parity, r);
    parity = parity && std::isfinite(r) && r <= 10;
  }
  for (int n : ns)
    for (int k = 0; k < 2; ++k) {
      const double a = mean_p[{0.05, n}][k], b = mean_p[{0.5, n}][k];
      const double r = std::max(a, b) / std::min(a, b);
      worst_delta = std::max(worst_delta, r);
      stable = stable && std::isfinite(r) && r <= 10;
    }
  std::string curve;
  for (double delta : {0.05, 0.5}) {
    curve += "; delta=" + fmt(delta) + " (i)/(ii):";
    for (int n : ns) curve += " N" + std::to_string(n) + ":" + fmt(mean_p[{delta, n}][0]) + "/" + fmt(mean_p[{delta, n}][1]);
  }
  return {parity && stable, "worst (i)-(ii) pressure spread " + fmt(worst_parity) + "x, worst delta spread " +
                                fmt(worst_delta) + "x (limits 10x)" + curve};
}

Outcome c7_p1p0() {
  const Built& b = p1p0();
  const FeSolution truth = b.hf->solve(kStokesOnline);
  const FieldErrors i = rb_error(b, Option::I, kStokesOnline, truth), ii = rb_error(b, Option::II, kStokesOnline, truth);
  const double gain = ii.pressure / i.pressure;
  const bool ok = ii.pressure <= 1e-2 && gain <= 10;
  return {ok, "mu=(0.6,2) N=20 pressure: (ii) " + fmt(ii.pressure) + " (limit 1e-2), (i) " + fmt(i.pressure) +
                  ", supremizer gain (ii)/(i) " + fmt(gain) + " (limit 10)"};
}

Outcome c8_p2p1() {
  const Built& b = p2p1();
  const FeSolution truth = b.hf->solve(kStokesOnline);
  const FieldErrors with = rb_error(b, Option::I, kStokesOnline, truth), without = rb_error(b, Option::II, kStokesOnline, truth);
  const double gain = without.pressure / with.pressure;
  const auto rows = infsup_profile(b.off.model, parameter_grid(b.hf->config().box, 5, 5), {Option::I, Option::II});
  std::map<std::pair<double, double>, std::array<double, 2>> beta;
  for (const auto& r : rows) beta[{r.mu.mu1, r.mu.mu2}][r.option == Option::I ? 0 : 1] = r.beta;
  bool larger = true;
  double min_with = 1e300, max_without = 0.0;
  for (const auto& [mu, v] : beta) {
    larger = larger && v[0] > v[1];
    min_with = std::min(min_with, v[0]);
    max_without = std::max(max_without, v[1]);
  }
  const bool ok = gain >= 10 && larger && beta.size() == 25;
  return {ok, "pressure with " + fmt(with.pressure) + " vs without " + fmt(without.pressure) + " (gain " + fmt(gain) +
                  ", need >= 10); beta_N with >= " + fmt(min_with) + ", without <= " + fmt(max_without) +
                  (larger ? ", larger at all 25 points" : ", NOT larger everywhere")};
}

Outcome c9_navier_stokes() {
  const Built& b = ns();
  const FeSolution truth = b.hf->solve(kNsOnline);
  const int its = truth.diagnostics.iterations;
  const bool direct = truth.diagnostics.continuation_steps == 0;
  double repro = 0.0;
  for (const Parameter& mu : b.off.trace.selected) {
    const FeSolution t = b.hf->solve(mu);
    for (Option o : {Option::I, Option::II}) {
      const FieldErrors e = rb_error(b, o, mu, t);
      repro = std::max({repro, e.velocity, e.pressure});
    }
  }
  const FieldErrors i = rb_error(b, Option::I, kNsOnline, truth), ii = rb_error(b, Option::II, kNsOnline, truth),
                    iii = rb_error(b, Option::III, kNsOnline, truth);
  const double held = std::max({i.velocity, i.pressure, ii.velocity, ii.pressure});
  const double p_ratio = iii.pressure / i.pressure;
  const bool ok = direct && its <= 10 && b.off.trace.selected.size() == 16 && repro <= 1e-6 && held <= 1e-3 &&
                  p_ratio >= 10 && ii.velocity <= 3 * i.velocity && b.offline_seconds <= 1800;
  return {ok, "Newton " + std::to_string(its) + " its" + (direct ? "" : " (continuation)") + "; reproduction " +
                  fmt(repro) + " (1e-6); mu=(120,2): (i) u " + fmt(i.velocity) + " p " + fmt(i.pressure) + ", (ii) u " +
                  fmt(ii.velocity) + " p " + fmt(ii.pressure) + " (1e-3); (iii)/(i) pressure " + fmt(p_ratio) +
                  " (>= 10); offline " + fmt(b.offline_seconds) + " s (limit 1800)"};
}

Outcome c10_modified_infsup() {
  bool ok = true;
  std::string detail;
  for (const Built* b : {&p1p1(), &p2p2(0.5)}) {
    const auto rows = infsup_profile(b->off.model, parameter_grid(b->hf->config().box, 5, 5),
                                     {Option::I, Option::II, Option::IV});
    double min_mod = 1e300, worst_iv_ratio = 0.0;
    std::map<std::pair<double, double>, std::map<Option, InfSupRow>> at;
    for (const auto& r : rows) at[{r.mu.mu1, r.mu.mu2}][r.option] = r;
    for (auto& [mu, m] : at) {
      min_mod = std::min({min_mod, m[Option::I].beta_modified, m[Option::II].beta_modified});
      const double r = m[Option::IV].beta / m[Option::I].beta;
      worst_iv_ratio = std::max(worst_iv_ratio, r);
      ok = ok && m[Option::IV].beta < m[Option::I].beta;
    }
    ok = ok && min_mod >= 1e-6 && at.size() == 25;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(b->hf->config().pair)) +
              ": min modified beta_N (i),(ii) " + fmt(min_mod) + " (>= 1e-6), max beta_N(iv)/beta_N(i) " +
              fmt(worst_iv_ratio) + " (< 1)";
  }
  return {ok, detail};
}

DenseMatrix trial_basis(const ReducedModel& m) {
  DenseMatrix W(m.Zu.rows(), m.trial_size());
  W.col(0) = m.lifting;
  W.middleCols(1, m.n_u) = m.Zu;
  W.rightCols(m.n_s) = m.Zs;
  return W;
}

DenseMatrix eval(const std::vector<ReducedAffine>& ops, double nu, double a) {
  DenseMatrix m = DenseMatrix::Zero(ops.front().m.rows(), ops.front().m.cols());
  for (const auto& t : ops) m += t.theta(nu, a) * t.m;
  return m;
}

Outcome c11_projection() {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> unif(-1, 1);
  const auto rand = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = unif(rng);
    return v;
  };
  double worst = 0.0;
  int checks = 0;
  for (const Built* b : {&p1p1(), &p2p2(0.5), &p1p0(), &ns()}) {
    const auto& m = b->off.model;
    const auto& hf = *b->hf;
    const DenseMatrix W = trial_basis(m);
    const DenseMatrix V = W.rightCols(m.velocity_size());
    const auto& box = hf.config().box;
    for (int k = 0; k < 20; ++k) {
      const Parameter mu{box.mu1_min + (box.mu1_max - box.mu1_min) * (0.5 + 0.5 * unif(rng)),
                         box.mu2_min + (box.mu2_max - box.mu2_min) * (0.5 + 0.5 * unif(rng))};
      const double nu = hf.nu(mu), a = hf.scaling(mu);
      const Vector w = rand(m.trial_size()), z = rand(m.trial_size()), v = rand(m.velocity_size());
      const Vector q = rand(m.n_p), r = rand(m.n_p);
      const auto check = [&](const std::vector<ReducedAffine>& red, const AffineOperator<SparseMatrix>& full,
                             const Vector& left, const DenseMatrix& Zl, const Vector& right, const DenseMatrix& Zr) {
        if (red.size() != full.size()) {
          worst = std::numeric_limits<double>::infinity();
          return;
        }
        if (red.empty()) return;
        const double x = left.dot(eval(red, nu, a) * right);
        const double y = (Zl * left).dot(full.evaluate(nu, a).multiply(Vector(Zr * right)));
        worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
        ++checks;
      };
      const auto& s = hf.stabilization();
      check(m.a, hf.viscous(), v, V, w, W);
      check(m.b, hf.divergence(), q, m.Zp, w, W);
      check(m.spq, s.spq, r, m.Zp, q, m.Zp);
      check(m.spv, s.spv, v, V, q, m.Zp);
      check(m.suq, s.suq, q, m.Zp, w, W);
      check(m.suv, s.suv, v, V, w, W);
      const auto tri = [&](const std::vector<ReducedTrilinear>& red, const std::optional<TrilinearOperator>& full, const Vector& left,
                           const DenseMatrix& Zl) {
        if (!full || red.empty()) return;
        double x = 0.0, y = 0.0;
        for (const auto& t : red) x += t.theta(nu, a) * left.dot(t.t.contract(w, z));
        for (std::size_t i = 0; i < full->size(); ++i)
          y += full->terms()[i].theta(nu, a) * (Zl * left).dot(full->apply(i, W * w, W * z));
        worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
        ++checks;
      };
      if (hf.config().problem == Problem::NavierStokes) {
        tri(m.c, hf.convection(), v, V);
        tri(m.tq, hf.stabilization().tq, q, m.Zp);
        tri(m.tv, hf.stabilization().tv, v, V);
      }
    }
  }

  // Supremizer identity (X_u T p, v) = b(v, p) on the stored snapshots.
  double worst_sup = 0.0;
  for (const Built* b : {&p1p1(), &ns()}) {
    const auto& hf = *b->hf;
    const auto& s = b->off.model.snapshots;
    for (std::size_t n = 0; n < s.size(); ++n) {
      const SparseMatrix B = hf.divergence().evaluate(hf.nu(s.mu[n]), hf.scaling(s.mu[n]));
      for (int k = 0; k < 20; ++k) {
        Vector v = rand(hf.velocity_dofs());
        for (int d : hf.velocity_space()->dirichlet_dofs()) v[d] = 0.0;
        const double lhs = s.supremizer[n].dot(hf.velocity_gram().multiply(v));
        const double rhs = s.pressure[n].dot(B.multiply(v));
        worst_sup = std::max(worst_sup, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
    }
  }
  const bool ok = worst <= 1e-10 && worst_sup <= 1e-9 && checks > 0;
  return {ok, std::to_string(checks) + " projection checks, worst " + fmt(worst) + " (1e-10); supremizer identity worst " +
                  fmt(worst_sup) + " (1e-9)"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs offline + sweep through the CLI; returns file name -> bytes.
std::map<std::string, std::string> cli_run(const std::filesystem::path& dir, const std::string& cfg, int nthreads) {
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "run.cfg");
    f << cfg << "output = " << (dir / "out").string() << "\nthreads = " << nthreads << '\n';
  }
  std::ostringstream out, err;
  const int rc = cli::run({"stabrb", "--config", (dir / "run.cfg").string(), "sweep"}, out, err);
  std::map<std::string, std::string> files;
  if (rc != 0) {
    files["<exit>"] = std::to_string(rc) + ": " + err.str();
    return files;
  }
  for (const char* name : {"trace.csv", "errors.csv", "errors_points.csv", "model.rbm"})
    files[name] = slurp(dir / "out" / name);
  return files;
}

Outcome c12_determinism() {
  const std::filesystem::path root = std::filesystem::temp_directory_path() / "stabrb_acceptance";
  const std::string stokes = "problem = stokes\nfe_pair = P1P1\nstabilization.delta = 0.05\nmesh.nx = 32\nmesh.ny = 16\n"
                             "rb.n_max = 20\nrb.train_size = 100\nsweep.test_size = 50\nsweep.n_values = 20\nseed = " +
                             std::to_string(kSeed) + "\n";
  const std::string navier = "problem = navier-stokes\nmesh.nx = 32\nmesh.ny = 16\nrb.n_max = 16\nrb.train_size = 64\n"
                             "sweep.test_size = 4\nsweep.n_values = 16\nseed = " +
                             std::to_string(kSeed) + "\n";
  bool ok = true;
  std::string detail;
  for (const auto& [name, cfg] : std::vector<std::pair<std::string, std::string>>{{"stokes", stokes}, {"navier-stokes", navier}}) {
    const auto a = cli_run(root / (name + "_t1"), cfg, 1);
    const auto b = cli_run(root / (name + "_t8"), cfg, 8);
    const auto c = cli_run(root / (name + "_t8b"), cfg, 8);
    const bool same = !a.count("<exit>") && a == b && b == c;
    if (a.count("<exit>")) detail += name + " run failed (" + a.at("<exit>") + "); ";
    std::size_t bytes = 0;
    for (const auto& [k, v] : a) bytes += v.size();
    detail += name + ": " + std::to_string(a.size()) + " files, " + std::to_string(bytes) + " bytes, threads 1/8/8 " +
              (same ? "identical" : "DIFFER") + "; ";
    ok = ok && same;
  }
  std::filesystem::remove_all(root);
  return {ok, detail.substr(0, detail.size() - 2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"manufactured-solution convergence", c1_convergence},
      {"reproduction at training points (Stokes P1P1)", c2_reproduction},
      {"held-out accuracy (Stokes P1P1)", c3_accuracy},
      {"offline-only stabilisation inaccuracy", c4_offline_only},
      {"supremizer pressure benefit (P1P1)", c5_supremizer_benefit},
      {"P2P2 option parity and delta robustness", c6_p2p2_parity},
      {"P1P0 edge-jump pressure", c7_p1p0},
      {"P2P1 supremizer necessity", c8_p2p1},
      {"Navier-Stokes protocol", c9_navier_stokes},
      {"modified inf-sup positivity", c10_modified_infsup},
      {"projection and supremizer identities", c11_projection},
      {"determinism across runs and thread counts", c12_determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << criteria[k].first << ": " << o.detail << " ("
              << fmt(seconds_since(t0)) << " s)" << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
