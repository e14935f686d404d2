#pragma once

#include <stdexcept>
#include <string>

namespace kdviss {

/// Operands live on different grids or have mismatched sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The symmetric part of an assembled generator is not negative
/// semidefinite within tolerance.
class DissipativityGateFailed : public std::runtime_error {
 public:
  DissipativityGateFailed(double lambda_max, double tolerance)
      : std::runtime_error("dissipativity gate failed: lambda_max=" +
                           std::to_string(lambda_max) +
                           " > tolerance=" + std::to_string(tolerance)),
        lambda_max_(lambda_max),
        tolerance_(tolerance) {}

  double lambda_max() const noexcept { return lambda_max_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double lambda_max_;
  double tolerance_;
};

/// Time-stepper setup failed (singular factorization, bad step size).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lyapunov parameter constraints cannot be satisfied.
class InfeasibleParameters : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit or certificate could not be produced from the data.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kdviss
