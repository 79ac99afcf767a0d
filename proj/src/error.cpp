#include "embedmap/error.hpp"

namespace embedmap {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kMalformedFile: return "MalformedFile";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kUnknownOutcomeLabel: return "UnknownOutcomeLabel";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyCounts: return "EmptyCounts";
    case ErrorCode::kEmptyLeaf: return "EmptyLeaf";
    case ErrorCode::kEmptyOperatingSet: return "EmptyOperatingSet";
    case ErrorCode::kCountExceedsSamples: return "CountExceedsSamples";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kScaleLimitExceeded: return "ScaleLimitExceeded";
  }
  return "Error";
}

}  // namespace embedmap
