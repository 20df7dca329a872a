#pragma once

#include <stdexcept>
#include <string>

namespace cadlag {

/// Argument outside the domain of an operation (time off the horizon, a >= b, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A structural invariant of an input object is violated. `invariant()` names it.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string invariant, const std::string& detail)
      : std::invalid_argument(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// An integrand coefficient is not measurable w.r.t. the prefix classes at its left endpoint.
class PredictabilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cadlag
