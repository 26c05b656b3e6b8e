#pragma once

#include <stdexcept>
#include <string>

namespace rpsolve {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input to an operation (bad radius, non-increasing grid, repeated index, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A pair energy hit a pole of the Richardson equations.
class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, int first, int second)
      : Error(what), first_(first), second_(second) {}

  /// Index of the offending pair energy.
  int first() const { return first_; }
  /// Index of the colliding partner: another pair energy, or -1 - j for pair state j.
  int second() const { return second_; }

 private:
  int first_;
  int second_;
};

/// A pair energy sits on the real integration contour and no principal value was requested.
class ContourError : public Error {
 public:
  using Error::Error;
};

/// Continuation in the pairing strength could not reach the target.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_good_strength)
      : Error(what), last_good_strength_(last_good_strength) {}

  double last_good_strength() const { return last_good_strength_; }

 private:
  double last_good_strength_;
};

/// Two pair energies merged and could not be separated by conjugate-pair promotion.
class CollisionError : public NonConvergenceError {
 public:
  using NonConvergenceError::NonConvergenceError;
};

/// Oracle basis or matrix exceeds the supported size.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace rpsolve
