#ifndef PULSEFORGE_ERROR_HPP
#define PULSEFORGE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pulseforge {

/// Failure categories. The CLI maps each category onto a stable exit code.
enum class ErrorKind {
  InvalidInput,        // malformed plan, schedule file, or argument (exit 2)
  InvalidAnsatz,       // non-positive duration or bad gamma profile (exit 2)
  DomainMismatch,      // time grid does not match the schedule (exit 2)
  InfeasibleTarget,    // target not reachable in the diamond topology (exit 3)
  InfeasibleAmplitude, // no mixing angle reproduces the requested amplitudes (exit 3)
  NoFeasibleTime,      // required duration exceeds the configured maximum (exit 3)
  DegeneratePhase,     // phase of a zero amplitude was requested
  UnsupportedComparison,
  IntegrationFailure,  // norm drift beyond tolerance (exit 4)
  VerificationFailure, // synthesized schedule misses its target (exit 4)
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidAnsatz: return "invalid-ansatz";
    case ErrorKind::DomainMismatch: return "domain-mismatch";
    case ErrorKind::InfeasibleTarget: return "infeasible-target";
    case ErrorKind::InfeasibleAmplitude: return "infeasible-amplitude";
    case ErrorKind::NoFeasibleTime: return "no-feasible-time";
    case ErrorKind::DegeneratePhase: return "degenerate-phase";
    case ErrorKind::UnsupportedComparison: return "unsupported-comparison";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::VerificationFailure: return "verification-failure";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InfeasibleTarget:
    case ErrorKind::InfeasibleAmplitude:
    case ErrorKind::NoFeasibleTime:
    case ErrorKind::DegeneratePhase:
      return 3;
    case ErrorKind::IntegrationFailure:
    case ErrorKind::VerificationFailure:
      return 4;
    default:
      return 2;
  }
}

}  // namespace pulseforge

#endif
