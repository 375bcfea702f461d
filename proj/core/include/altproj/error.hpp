#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace altproj {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NumericalFailure,
  UnsupportedSet,
  UnsupportedDictionary,
  IntersectionNotTrivial,
  InvalidCustom,
  InstanceInvalid,
  PreconditionViolated,
  InsufficientIterates,
  NotInterleaved,
  SegmentIndexOutside,
  NotApplicable,
  RetryExhausted,
  BudgetExceeded,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace altproj
