#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mongeampere {

enum class ErrorKind {
  InvalidInput,        // bad arguments or malformed data
  RejectedMeasure,     // tail exponent does not give an integrable excess
  InternalConsistency, // an identity that must hold numerically failed
  Unsupported,         // dimension or configuration outside the implemented scope
  Degenerate,          // geometric or least-squares degeneracy
  NonConvergence,      // iteration budget exhausted
  InvariantViolation,  // a proven inequality failed on computed data
  ConstructionFailure, // a barrier construction could not be completed
};

const char* to_string(ErrorKind kind) noexcept;

// Exit code used by the command-line tool for an error of this kind.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the residual trace of an iteration that did not converge.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history);

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace mongeampere
