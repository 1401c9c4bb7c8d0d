#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stabrb/hifi.hpp"
#include "stabrb/linalg.hpp"

namespace stabrb {

/// (i) supremizers + stabilisation online, (ii) stabilisation only,
/// (iii) supremizers only (offline-only stabilisation), (iv) neither.
enum class Option { I, II, III, IV };

std::string_view to_string(Option o);
Option option_from_string(std::string_view s);
inline bool uses_supremizers(Option o) { return o == Option::I || o == Option::III; }
inline bool uses_stabilization(Option o) { return o == Option::I || o == Option::II; }

struct ReducedAffine {
  Monomial theta;
  DenseMatrix m;
};

struct ReducedTrilinear {
  Monomial theta;
  DenseTensor3 t;
};

/// FE snapshots in greedy order. Velocities are homogeneous parts.
struct Snapshots {
  std::vector<Parameter> mu;
  std::vector<Vector> velocity;
  std::vector<Vector> pressure;
  std::vector<Vector> supremizer;

  std::size_t size() const { return mu.size(); }
};

/// Reduced operators over trial coordinates x = (1, u_N): column 0 of every
/// trial index is the lifting, then Z_u, then Z_s. Test velocity indices
/// skip the lifting. Sub-options are obtained by slicing.
struct ReducedModel {
  ProblemConfig config;
  std::uint64_t seed = 0;
  int n_u = 0, n_s = 0, n_p = 0;
  bool enriched = true;  // false after strip_supremizers

  Snapshots snapshots;
  DenseMatrix Zu, Zs, Zp;
  Vector lifting;

  std::vector<ReducedAffine> a;    // V x W
  std::vector<ReducedAffine> b;    // Q x W
  std::vector<ReducedAffine> suv;  // V x W
  std::vector<ReducedAffine> spv;  // V x Q
  std::vector<ReducedAffine> suq;  // Q x W
  std::vector<ReducedAffine> spq;  // Q x Q
  std::vector<ReducedTrilinear> c;   // V x W x W
  std::vector<ReducedTrilinear> tq;  // Q x W x W
  std::vector<ReducedTrilinear> tv;  // V x W x W
  DenseMatrix xu;  // V x V
  DenseMatrix xp;  // Q x Q

  int velocity_size() const { return n_u + n_s; }
  int trial_size() const { return 1 + n_u + n_s; }
};

/// Orthonormalise the first `n` snapshots (all when n < 0) and project every
/// affine operator of `hf`. Velocity and supremizers use X_u (supremizers
/// orthogonalised against Z_u first), pressure the L^2 mass matrix. When a
/// snapshot is dropped as dependent the dropped counts are reported through
/// `dropped` (may be null).
ReducedModel build_reduced_model(const HighFidelityModel& hf, const Snapshots& snapshots, int n = -1,
                                 std::vector<std::string>* dropped = nullptr, int threads = 1);

/// Rebuild from the first `n` stored snapshots.
ReducedModel truncate(const HighFidelityModel& hf, const ReducedModel& model, int n, int threads = 1);

/// Drop / restore the supremizer block. Stripping slices the stored
/// operators; enriching re-projects from the snapshots.
ReducedModel strip_supremizers(const ReducedModel& model);
ReducedModel enrich_supremizers(const HighFidelityModel& hf, const ReducedModel& model, int threads = 1);

struct ReducedSolution {
  Option option;
  Parameter mu;
  Vector u;  // reduced velocity coordinates (without the lifting entry)
  Vector p;
  int iterations = 0;
  std::vector<double> residual_history;
};

/// Reduced operators of one option, sliced once; solves touch nothing of FE size.
class OnlineSystem {
 public:
  OnlineSystem(const ReducedModel& model, Option option);

  Option option() const { return option_; }
  int velocity_size() const { return static_cast<int>(vel_.size()); }
  int pressure_size() const { return n_p_; }

  /// Dense (Newton) solve. Throws SingularMatrix / NonConvergence with the
  /// option in the message.
  ReducedSolution solve(Parameter mu) const;

  /// Residual and Jacobian at reduced coordinates (u, p).
  Vector residual(Parameter mu, const Vector& u, const Vector& p, bool with_convection) const;
  DenseMatrix jacobian(Parameter mu, const Vector& u, bool with_convection) const;

  /// B_N (Q x velocity), X_u,N, X_p,N and S^{pq}_N at mu.
  DenseMatrix divergence(Parameter mu) const;
  DenseMatrix velocity_gram() const;
  DenseMatrix pressure_gram() const;
  DenseMatrix pressure_stabilization(Parameter mu) const;  // zero when not stabilised

  static constexpr double kTolerance = 1e-10;
  static constexpr int kMaxIterations = 50;

 private:
  Option option_;
  Problem problem_;
  bool stabilized_;
  int n_p_;
  std::vector<int> vel_;    // indices into the model's velocity block
  std::vector<int> trial_;  // 0 followed by vel_ + 1
  std::vector<ReducedAffine> a_, bt_, bm_, suv_, spv_, suq_, spq_;
  std::vector<ReducedTrilinear> c_, tq_, tv_;
  DenseMatrix xu_, xp_;
};

/// Reconstruct FE velocity (total, lifting included) and pressure.
FeSolution reconstruct(const HighFidelityModel& hf, const ReducedModel& model, const ReducedSolution& s);

/// Convenience: OnlineSystem(model, option).solve(mu).
ReducedSolution solve_reduced(const ReducedModel& model, Option option, Parameter mu);

/// beta_N(mu): smallest generalised singular value of B_N.
double reduced_infsup(const OnlineSystem& sys, Parameter mu);

/// Modified constant: min over eigenvectors q of (B X_u^-1 B^T + S) q = l X_p q
/// of [sqrt(q B X_u^-1 B^T q) + sqrt(q S q)] / ||q||_{X_p}.
double modified_infsup(const DenseMatrix& B, const DenseMatrix& Xu, const DenseMatrix& Xp,
                       const DenseMatrix& S);
double modified_infsup(const OnlineSystem& sys, Parameter mu);

// ------------------------------------------------------------------- greedy

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::uint64_t bits);

/// Jittered tensor grid of `count` points (g1 x g2 cells, row-major, the
/// first `count` cells), one uniform point per cell.
std::vector<Parameter> training_set(const ParameterBox& box, int count, std::uint64_t seed);

/// Uniform random points, skipping any that coincide with `exclude`.
std::vector<Parameter> random_parameters(const ParameterBox& box, int count, std::uint64_t seed,
                                         const std::vector<Parameter>& exclude = {});

struct GreedyOptions {
  int n_max = 20;
  int train_size = 100;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct GreedyTrace {
  std::vector<Parameter> selected;
  std::vector<double> max_indicator;  // before adding the snapshot
  std::vector<Parameter> training;
  std::uint64_t seed = 0;
  std::string stop_reason;
  std::vector<std::string> notes;
};

struct OfflineResult {
  ReducedModel model;
  GreedyTrace trace;
};

/// Indicator: relative FE residual of the reconstruction of the option (i)
/// solution; +inf when the reduced solve fails.
double greedy_indicator(const HighFidelityModel& hf, const ReducedModel& model, const OnlineSystem& sys,
                        Parameter mu);

OfflineResult greedy_offline(const HighFidelityModel& hf, const GreedyOptions& options);

// ------------------------------------------------------------ serialisation

void write_model(std::ostream& out, const ReducedModel& model);
ReducedModel read_model(std::istream& in);

}  // namespace stabrb
