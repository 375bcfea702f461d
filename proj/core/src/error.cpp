#include "altproj/error.hpp"

namespace altproj {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::UnsupportedSet: return "UnsupportedSet";
    case ErrorCode::UnsupportedDictionary: return "UnsupportedDictionary";
    case ErrorCode::IntersectionNotTrivial: return "IntersectionNotTrivial";
    case ErrorCode::InvalidCustom: return "InvalidCustom";
    case ErrorCode::InstanceInvalid: return "InstanceInvalid";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::InsufficientIterates: return "InsufficientIterates";
    case ErrorCode::NotInterleaved: return "NotInterleaved";
    case ErrorCode::SegmentIndexOutside: return "SegmentIndexOutside";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::RetryExhausted: return "RetryExhausted";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace altproj
