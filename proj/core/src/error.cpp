#include "urbanot/error.hpp"

namespace urbanot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::UnboundedDomain: return "UnboundedDomain";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::NotProbability: return "NotProbability";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::UnbalancedMasses: return "UnbalancedMasses";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::DegeneratePlan: return "DegeneratePlan";
    case ErrorCode::AtomOutsideDomain: return "AtomOutsideDomain";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NonpositiveMass: return "NonpositiveMass";
    case ErrorCode::MassOutOfRange: return "MassOutOfRange";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::ConditionNotSatisfied: return "ConditionNotSatisfied";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::IncompatibleGrids: return "IncompatibleGrids";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace urbanot
