#pragma once

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "stabrb/errors.hpp"
#include "stabrb/linalg.hpp"

namespace stabrb {

struct Parameter {
  double mu1 = 0.0;
  double mu2 = 0.0;
};

enum class Problem { Stokes, NavierStokes };

std::string_view to_string(Problem p);
Problem problem_from_string(std::string_view s);

/// Horizontal stretch mapping the reference cavity (0, 1 + mu_bar2) x (0, 1)
/// onto (0, 1 + mu2) x (0, 1).
struct GeometryMap {
  double mu_bar2 = 1.0;

  double scaling(double mu2) const { return (1.0 + mu2) / (1.0 + mu_bar2); }
  double reference_length() const { return 1.0 + mu_bar2; }

  /// J_T = diag(a, 1)
  std::array<double, 2> jacobian(double mu2) const { return {scaling(mu2), 1.0}; }
  double jacobian_determinant(double mu2) const { return scaling(mu2); }

  /// Diagonals of kappa = nu diag(1/a, a) and chi = diag(1, a).
  std::array<double, 2> kappa(double nu, double mu2) const {
    const double a = scaling(mu2);
    return {nu / a, nu * a};
  }
  std::array<double, 2> chi(double mu2) const { return {1.0, scaling(mu2)}; }
};

/// Stokes: nu = mu1 (viscosity). Navier-Stokes: nu = L |u| / mu1 with L = |u| = 1.
double viscosity(Problem problem, Parameter mu);

/// Coefficient scale * nu^nu_power * a^a_power. Every affine coefficient of
/// the cavity problem has this form.
struct Monomial {
  double scale = 1.0;
  int nu_power = 0;
  int a_power = 0;

  double operator()(double nu, double a) const {
    return scale * std::pow(nu, nu_power) * std::pow(a, a_power);
  }
};

inline bool operator==(const Monomial& x, const Monomial& y) {
  return x.scale == y.scale && x.nu_power == y.nu_power && x.a_power == y.a_power;
}

/// sum_q Theta_q(mu) M_q.
template <class Op>
struct AffineTerm {
  Monomial theta;
  Op op;
};

template <class Op>
class AffineOperator {
 public:
  AffineOperator() = default;

  void add(Monomial theta, Op op) { terms_.push_back({theta, std::move(op)}); }

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<AffineTerm<Op>>& terms() const { return terms_; }
  const AffineTerm<Op>& operator[](std::size_t q) const { return terms_.at(q); }

  std::vector<double> thetas(double nu, double a) const {
    std::vector<double> t;
    t.reserve(terms_.size());
    for (const auto& term : terms_) t.push_back(term.theta(nu, a));
    return t;
  }

  Op evaluate(double nu, double a) const;

 private:
  std::vector<AffineTerm<Op>> terms_;
};

template <>
inline SparseMatrix AffineOperator<SparseMatrix>::evaluate(double nu, double a) const {
  if (terms_.empty()) throw InvalidArgument("AffineOperator: no terms");
  const std::vector<double> t = thetas(nu, a);
  std::vector<const SparseMatrix*> ms;
  for (const auto& term : terms_) ms.push_back(&term.op);
  return linear_combination(t, ms);
}

template <>
inline Vector AffineOperator<Vector>::evaluate(double nu, double a) const {
  if (terms_.empty()) throw InvalidArgument("AffineOperator: no terms");
  Vector out = Vector::Zero(terms_.front().op.size());
  for (const auto& term : terms_) out += term.theta(nu, a) * term.op;
  return out;
}

template <>
inline DenseMatrix AffineOperator<DenseMatrix>::evaluate(double nu, double a) const {
  if (terms_.empty()) throw InvalidArgument("AffineOperator: no terms");
  DenseMatrix out = DenseMatrix::Zero(terms_.front().op.rows(), terms_.front().op.cols());
  for (const auto& term : terms_) out += term.theta(nu, a) * term.op;
  return out;
}

}  // namespace stabrb
