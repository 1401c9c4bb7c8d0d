#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stabrb {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for combinations the library deliberately does not support
/// (vector P0 spaces, lifting on P0, ...).
class Unsupported : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(const std::string& what, long pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  long pivot() const { return pivot_; }

 private:
  long pivot_;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }
  double last_residual() const { return history_.empty() ? 0.0 : history_.back(); }

 private:
  std::vector<double> history_;
};

}  // namespace stabrb
