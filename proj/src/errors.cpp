#include "blimp/types.hpp"

namespace blimp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kGimbalLock: return "GimbalLock";
    case ErrorCode::kSingularMass: return "SingularMass";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kContinuationBreakdown: return "ContinuationBreakdown";
    case ErrorCode::kDegenerateModel: return "DegenerateModel";
    case ErrorCode::kDegenerateDescent: return "DegenerateDescent";
    case ErrorCode::kEigenFailure: return "EigenFailure";
    case ErrorCode::kNotSteady: return "NotSteady";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kInsufficientSpan: return "InsufficientSpan";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kUnitError: return "UnitError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

bool is_usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError:
    case ErrorCode::kUnitError:
    case ErrorCode::kConfigError:
    case ErrorCode::kIoError:
      return true;
    default:
      return false;
  }
}

}  // namespace blimp
