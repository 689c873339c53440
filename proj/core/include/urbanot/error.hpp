#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace urbanot {

enum class ErrorCode {
  NegativeDensity,
  UnboundedDomain,
  ZeroMass,
  NotProbability,
  InvalidMeasure,
  UnbalancedMasses,
  EmptyCloud,
  DegeneratePlan,
  AtomOutsideDomain,
  NoConvergence,
  GridTooCoarse,
  NonpositiveMass,
  MassOutOfRange,
  InvalidK,
  ConditionNotSatisfied,
  SearchSpaceTooLarge,
  IncompatibleGrids,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the CLI maps codes to exit
/// statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace urbanot
