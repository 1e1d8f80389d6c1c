#pragma once

#include <stdexcept>
#include <string>

namespace exstop {

enum class ErrorCode {
  // diffusion
  NonpositiveSigma,
  DegenerateRoots,
  InconsistentDerivatives,
  NonmonotoneF,
  OutOfDomain,
  // vss solvers
  RequiresSIndependent,
  EmptyDomain,
  AssumptionViolated,
  DivisionByZero,
  NotDifferentiable,
  TruncationTooSmall,
  ZeroDenominator,
  // majorant
  DegenerateInterval,
  AnchorBelowObstacle,
  OutOfExcursionRange,
  // drawdown application
  ConvergenceViolated,
  NonpositiveState,
  NoTangency,
  // simulator
  AlreadyAbsorbed,
  NonpositiveDt,
  UnstableScheme,
  // cli
  ConfigParse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what = "") {
  throw Error(code, what);
}

}  // namespace exstop
