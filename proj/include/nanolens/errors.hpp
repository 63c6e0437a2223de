#pragma once

#include <stdexcept>
#include <string>

namespace nanolens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A geometry violates one of its invariants; the message names it.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// An evaluation point or argument is outside the solver's domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature ran out of refinements.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_estimate, int last_order)
      : Error(what), last_estimate_(last_estimate), last_order_(last_order) {}

  double last_estimate() const noexcept { return last_estimate_; }
  int last_order() const noexcept { return last_order_; }

 private:
  double last_estimate_;
  int last_order_;
};

/// Stationary-point search or classification could not complete.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace nanolens
