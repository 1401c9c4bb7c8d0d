#include "stabrb/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "stabrb/errors.hpp"
#include "stabrb/parallel.hpp"
#include "stabrb/quadrature.hpp"

namespace stabrb {

namespace {

double relative(const SparseMatrix& X, const Vector& approx, const Vector& truth) {
  const Vector d = approx - truth;
  const double num = d.dot(X.multiply(d));
  if (num == 0.0) return 0.0;
  return std::sqrt(num / truth.dot(X.multiply(truth)));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double relative_h1(const HighFidelityModel& hf, const Vector& approx, const Vector& truth) {
  return relative(hf.velocity_gram(), approx, truth);
}

double relative_l2(const HighFidelityModel& hf, const Vector& approx, const Vector& truth) {
  return relative(hf.pressure_mass(), approx, truth);
}

FieldErrors relative_errors(const HighFidelityModel& hf, const FeSolution& approx, const FeSolution& truth) {
  return {relative_h1(hf, approx.total_velocity(), truth.total_velocity()),
          relative_l2(hf, approx.pressure.coefficients, truth.pressure.coefficients)};
}

// ------------------------------------------------------- manufactured solution

ManufacturedSolution cavity_manufactured_solution() {
  using std::cos;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  ManufacturedSolution m;
  m.velocity = [](Vec2 p) {
    const double sx = sin(pi * p.x / 2), sy = sin(pi * p.y);
    return std::array<double, 2>{2 * pi * sx * sx * sy * cos(pi * p.y), -pi * sx * cos(pi * p.x / 2) * sy * sy};
  };
  m.velocity_gradient = [](Vec2 p) {
    const double sx = sin(pi * p.x / 2), sy = sin(pi * p.y);
    const double mixed = pi * pi / 4 * (cos(pi * (p.x - 2 * p.y)) - cos(pi * (p.x + 2 * p.y)));
    return std::array<Vec2, 2>{Vec2{mixed, 2 * pi * pi * sx * sx * cos(2 * pi * p.y)},
                               Vec2{-pi * pi / 2 * sy * sy * cos(pi * p.x), -mixed}};
  };
  m.pressure = [](Vec2 p) { return cos(pi * p.x) * cos(pi * p.y); };
  m.body_force = [](Vec2 p) {
    const double sx = sin(pi * p.x / 2), sy = sin(pi * p.y);
    const double pi2 = pi * pi;
    return std::array<double, 2>{
        pi * (10 * pi2 * sx * sx * sy - sin(pi * p.x) - pi2 * sy) * cos(pi * p.y),
        pi * (-2.5 * pi2 * sin(pi * p.x) * sy * sy + pi2 * sin(pi * p.x) - sy * cos(pi * p.x))};
  };
  return m;
}

ExactErrors exact_errors(const FeFunction& velocity, const FeFunction& pressure, const ManufacturedSolution& exact,
                         int gauss_points) {
  const TriangleRule rule = collapsed_gauss_rule(gauss_points);
  const Mesh& mesh = velocity.space->mesh();
  double eu = 0.0, ep = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles()[static_cast<std::size_t>(k)];
    const double area = mesh.element_geometry(k).area;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& l = rule.points[q];
      Vec2 x{0.0, 0.0};
      for (int i = 0; i < 3; ++i) x = x + l[static_cast<std::size_t>(i)] * mesh.vertices()[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])];
      const auto gh = eval_gradient_local(velocity, k, l);
      const auto g = exact.velocity_gradient(x);
      double du = 0.0;
      for (std::size_t c = 0; c < 2; ++c) du += std::pow(gh[c].x - g[c].x, 2) + std::pow(gh[c].y - g[c].y, 2);
      const double dp = eval_local(pressure, k, l)[0] - exact.pressure(x);
      eu += area * rule.weights[q] * du;
      ep += area * rule.weights[q] * dp * dp;
    }
  }
  return {std::sqrt(eu), std::sqrt(ep)};
}

ConvergenceStudy convergence_study(FePair pair, const StabilizationConfig& stabilization,
                                   const std::vector<std::array<int, 2>>& meshes) {
  const ManufacturedSolution exact = cavity_manufactured_solution();
  ConvergenceStudy out;
  for (const auto& [nx, ny] : meshes) {
    ProblemConfig c;
    c.pair = pair;
    c.stabilization = stabilization;
    c.box = {1.0, 1.0, 1.0, 1.0};
    c.nx = nx;
    c.ny = ny;
    c.lid_speed = 0.0;
    const HighFidelityModel hf(c, exact.body_force);
    const FeSolution s = hf.solve({1.0, 1.0});
    ConvergenceLevel level;
    level.nx = nx;
    level.ny = ny;
    const auto& d = hf.mesh().element_diameters();
    level.h = *std::max_element(d.begin(), d.end());
    level.fe = exact_errors(FeFunction(hf.velocity_space(), s.total_velocity()), s.pressure, exact);

    const FeFunction iu = interpolate(hf.velocity_space(), exact.velocity);
    FeFunction ip = interpolate(hf.pressure_space(), [&](Vec2 p) { return std::array<double, 2>{exact.pressure(p), 0.0}; });
    level.interpolant = exact_errors(iu, ip, exact);
    out.levels.push_back(level);
  }
  for (std::size_t i = 1; i < out.levels.size(); ++i) {
    const auto& a = out.levels[i - 1];
    const auto& b = out.levels[i];
    out.velocity_rate.push_back(std::log2(a.fe.velocity_h1 / b.fe.velocity_h1));
    out.pressure_rate.push_back(std::log2(a.fe.pressure_l2 / b.fe.pressure_l2));
    out.interpolant_velocity_rate.push_back(std::log2(a.interpolant.velocity_h1 / b.interpolant.velocity_h1));
    out.interpolant_pressure_rate.push_back(std::log2(a.interpolant.pressure_l2 / b.interpolant.pressure_l2));
  }
  return out;
}

// ------------------------------------------------------------------- sweeps

std::vector<Parameter> make_test_set(const ParameterBox& box, int count, std::uint64_t seed,
                                     const std::vector<Parameter>& exclude) {
  return random_parameters(box, count, seed, exclude);
}

std::vector<Parameter> parameter_grid(const ParameterBox& box, int n1, int n2) {
  if (n1 < 1 || n2 < 1) throw InvalidArgument("parameter grid: counts must be >= 1");
  const auto node = [](double lo, double hi, int i, int n) { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1); };
  std::vector<Parameter> out;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      out.push_back({node(box.mu1_min, box.mu1_max, i, n1), node(box.mu2_min, box.mu2_max, j, n2)});
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ErrorReport error_sweep(const HighFidelityModel& hf, const ReducedModel& model, const SweepOptions& options) {
  ErrorReport report;
  const auto& test = options.test_set;

  // FE truth, once per test point.
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::optional<FeSolution>> truth(test.size());
  std::vector<std::string> failure(test.size());
  parallel_for(test.size(), options.threads, [&](std::size_t i) {
    try {
      truth[i] = hf.solve(test[i]);
    } catch (const std::exception& e) {
      failure[i] = e.what();
    }
  });
  report.truth_seconds = seconds_since(t0);
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (truth[i]) {
      valid.push_back(i);
    } else {
      std::ostringstream msg;
      msg << "test point " << i << " mu = (" << test[i].mu1 << ", " << test[i].mu2
          << ") excluded: FE truth failed: " << failure[i];
      report.warnings.push_back(msg.str());
    }
  }

  t0 = std::chrono::steady_clock::now();
  for (int n : options.n_values) {
    if (n < 1 || n > static_cast<int>(model.snapshots.size())) {
      throw InvalidArgument("error sweep: N = " + std::to_string(n) + " outside [1, " +
                            std::to_string(model.snapshots.size()) + "]");
    }
    const ReducedModel sub = n == model.n_p && n == static_cast<int>(model.snapshots.size()) ? model
                                                                                            : truncate(hf, model, n, options.threads);
    for (Option o : options.options) {
      if (uses_supremizers(o) && !sub.enriched) {
        report.warnings.push_back("N = " + std::to_string(n) + ": option (" + std::string(to_string(o)) +
                                  ") skipped, model has no supremizers");
        continue;
      }
      const OnlineSystem sys(sub, o);
      std::vector<PointError> pts(valid.size());
      std::vector<std::string> errs(valid.size());
      parallel_for(valid.size(), options.threads, [&](std::size_t k) {
        const std::size_t i = valid[k];
        PointError& pe = pts[k];
        pe.n = n;
        pe.option = o;
        pe.point = i;
        pe.mu = test[i];
        try {
          const FeSolution rb = reconstruct(hf, sub, sys.solve(test[i]));
          const FieldErrors e = relative_errors(hf, rb, *truth[i]);
          pe.velocity = e.velocity;
          pe.pressure = e.pressure;
        } catch (const std::runtime_error& e) {  // SingularMatrix, NonConvergence
          pe.velocity = pe.pressure = std::numeric_limits<double>::infinity();
          errs[k] = e.what();
        }
      });
      double mean_u = 0.0, mean_p = 0.0, max_u = 0.0, max_p = 0.0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!errs[k].empty()) report.warnings.push_back("N = " + std::to_string(n) + ": " + errs[k]);
        mean_u += pts[k].velocity;
        mean_p += pts[k].pressure;
        max_u = std::max(max_u, pts[k].velocity);
        max_p = std::max(max_p, pts[k].pressure);
        report.points.push_back(pts[k]);
      }
      const double count = static_cast<double>(pts.size());
      const int n_test = static_cast<int>(pts.size());
      report.rows.push_back({n, o, "velocity", "H1-seminorm", count > 0 ? mean_u / count : 0.0, max_u, n_test, options.seed});
      report.rows.push_back({n, o, "pressure", "L2", count > 0 ? mean_p / count : 0.0, max_p, n_test, options.seed});
    }
  }
  report.online_seconds = seconds_since(t0);
  return report;
}

std::vector<InfSupRow> infsup_profile(const ReducedModel& model, const std::vector<Parameter>& grid,
                                      const std::vector<Option>& options) {
  std::vector<InfSupRow> out;
  for (Option o : options) {
    if (uses_supremizers(o) && !model.enriched) continue;
    const OnlineSystem sys(model, o);
    for (const Parameter& mu : grid) out.push_back({mu, o, reduced_infsup(sys, mu), modified_infsup(sys, mu)});
  }
  return out;
}

}  // namespace stabrb
