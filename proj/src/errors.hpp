#pragma once

#include <stdexcept>
#include <string>

namespace levybridge {

/// Raised when an argument lies outside the region where a quantity is defined,
/// e.g. a log-Lambda below the solvability floor of a functional equation.
class DomainError : public std::domain_error {
public:
  DomainError(const std::string& what, double bound = 0.0)
      : std::domain_error(what), bound_(bound) {}

  /// The computed limit that was violated (floor, grid edge, ...).
  double bound() const noexcept { return bound_; }

private:
  double bound_;
};

/// Quadrature or root finding did not reach its tolerance.
class NumericFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace levybridge
