#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace embedmap {

enum class ErrorCode {
  kIoError,
  kMalformedFile,
  kNonFiniteValue,
  kUnknownOutcomeLabel,
  kDimensionMismatch,
  kEmptyCounts,
  kEmptyLeaf,
  kEmptyOperatingSet,
  kCountExceedsSamples,
  kLengthMismatch,
  kInvalidArgument,
  kInvalidSpec,
  kScaleLimitExceeded,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this type. Every code is caused
// by caller input; anything else escaping the library is an internal bug.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace embedmap
