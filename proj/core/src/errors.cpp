#include "mongeampere/errors.hpp"

#include <utility>

namespace mongeampere {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::RejectedMeasure: return "rejected measure";
    case ErrorKind::InternalConsistency: return "internal consistency";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::InvariantViolation: return "invariant violation";
    case ErrorKind::ConstructionFailure: return "construction failure";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonConvergence: return 3;
    case ErrorKind::InvariantViolation:
    case ErrorKind::InternalConsistency: return 4;
    case ErrorKind::InvalidInput:
    case ErrorKind::RejectedMeasure:
    case ErrorKind::Unsupported: return 2;
    default: return 1;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

NonConvergenceError::NonConvergenceError(const std::string& what, std::vector<double> history)
    : Error(ErrorKind::NonConvergence, what), history_(std::move(history)) {}

}  // namespace mongeampere
