#pragma once

#include <stdexcept>
#include <string>

namespace eqdesign {

/// Invalid user input: bad dimensions, malformed files, unsupported kinds.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical computation could not be carried out (singular blocks,
/// infeasible grids, overflow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a moment (or localizing) matrix fails its Cholesky pivot test.
class SingularMomentMatrix : public NumericalError {
 public:
  SingularMomentMatrix(const std::string& what, int pivot)
      : NumericalError(what), pivot_(pivot) {}
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

class InfeasibleGrid : public NumericalError {
 public:
  InfeasibleGrid(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace eqdesign
