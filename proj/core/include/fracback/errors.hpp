#pragma once

#include <stdexcept>
#include <string>

namespace fracback {

/// Raised when inputs violate a documented precondition: out-of-range
/// arguments, malformed configuration, or parameters outside the regime a
/// solver supports (e.g. amplification exponents beyond floating range).
class validation_error : public std::invalid_argument {
public:
  explicit validation_error(const std::string& message)
      : std::invalid_argument(message) {}
};

/// Raised when a computation fails numerically: overflow while evaluating a
/// weighted norm, non-convergence of an iteration, or loss of finiteness.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace fracback
