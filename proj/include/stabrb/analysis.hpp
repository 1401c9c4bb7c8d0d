#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stabrb/hifi.hpp"
#include "stabrb/rb.hpp"

namespace stabrb {

// ------------------------------------------------------------------ metrics

/// ||a - b|| / ||b|| in the X_u (H^1 seminorm) or pressure L^2 inner product.
/// Returns 0 when a == b, even if b == 0.
double relative_h1(const HighFidelityModel& hf, const Vector& approx, const Vector& truth);
double relative_l2(const HighFidelityModel& hf, const Vector& approx, const Vector& truth);

struct FieldErrors {
  double velocity = 0.0;  // relative H^1 seminorm of the total velocity
  double pressure = 0.0;  // relative L^2
};

FieldErrors relative_errors(const HighFidelityModel& hf, const FeSolution& approx, const FeSolution& truth);

// ------------------------------------------------------- manufactured solution

/// Divergence-free velocity from the stream function
/// psi = sin^2(pi x / 2) sin^2(pi y) on (0, 2) x (0, 1), vanishing on the
/// boundary; zero-mean pressure cos(pi x) cos(pi y); f = -Lap u + grad p (nu = 1).
struct ManufacturedSolution {
  std::function<std::array<double, 2>(Vec2)> velocity;
  std::function<std::array<Vec2, 2>(Vec2)> velocity_gradient;  // gradient of each component
  std::function<double(Vec2)> pressure;
  VectorField body_force;
};

ManufacturedSolution cavity_manufactured_solution();

struct ExactErrors {
  double velocity_h1 = 0.0;  // absolute H^1 seminorm
  double pressure_l2 = 0.0;  // absolute L^2
};

/// Errors against the exact fields with an n x n collapsed Gauss rule per triangle.
ExactErrors exact_errors(const FeFunction& velocity, const FeFunction& pressure, const ManufacturedSolution& exact,
                         int gauss_points = 5);

struct ConvergenceLevel {
  int nx = 0, ny = 0;
  double h = 0.0;  // max element diameter
  ExactErrors fe;
  ExactErrors interpolant;
};

struct ConvergenceStudy {
  std::vector<ConvergenceLevel> levels;
  /// log2(e_h / e_{h/2}) between consecutive levels.
  std::vector<double> velocity_rate, pressure_rate;
  std::vector<double> interpolant_velocity_rate, interpolant_pressure_rate;
};

/// Stokes with nu = 1 on (0, 2) x (0, 1) (mu = (1, 1)) and homogeneous
/// Dirichlet data, one solve per mesh.
ConvergenceStudy convergence_study(FePair pair, const StabilizationConfig& stabilization,
                                   const std::vector<std::array<int, 2>>& meshes);

// ------------------------------------------------------------------- sweeps

/// `count` uniform random points of the box, none equal to an excluded one.
std::vector<Parameter> make_test_set(const ParameterBox& box, int count, std::uint64_t seed,
                                     const std::vector<Parameter>& exclude = {});

/// n1 x n2 tensor grid including the box corners.
std::vector<Parameter> parameter_grid(const ParameterBox& box, int n1, int n2);

struct SweepOptions {
  std::vector<int> n_values;
  std::vector<Option> options{Option::I, Option::II, Option::III};
  std::vector<Parameter> test_set;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct PointError {
  int n = 0;
  Option option = Option::I;
  std::size_t point = 0;  // index into the test set
  Parameter mu;
  double velocity = 0.0;
  double pressure = 0.0;
};

struct ErrorRow {
  int n = 0;
  Option option = Option::I;
  std::string field;  // "velocity" | "pressure"
  std::string norm;   // "H1-seminorm" | "L2"
  double mean = 0.0;
  double max = 0.0;
  int n_test = 0;
  std::uint64_t seed = 0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  std::vector<PointError> points;
  std::vector<std::string> warnings;
  double truth_seconds = 0.0;
  double online_seconds = 0.0;
};

/// RB vs FE errors for every (N, option) on the test set. Sub-models are
/// truncations of `model`. Test points whose FE truth solve fails are
/// dropped with a warning; a failing online solve records +inf.
ErrorReport error_sweep(const HighFidelityModel& hf, const ReducedModel& model, const SweepOptions& options);

struct InfSupRow {
  Parameter mu;
  Option option = Option::I;
  double beta = 0.0;           // smallest generalised singular value of B_N
  double beta_modified = 0.0;  // with the pressure stabilisation term
};

std::vector<InfSupRow> infsup_profile(const ReducedModel& model, const std::vector<Parameter>& grid,
                                      const std::vector<Option>& options);

double median(std::vector<double> values);

}  // namespace stabrb
