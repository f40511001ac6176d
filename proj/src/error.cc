#include "dipca/error.h"

namespace dipca {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidData: return "invalid-data";
    case ErrorCode::kIndexOutOfRange: return "index-out-of-range";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDegenerateDirection: return "degenerate-direction";
    case ErrorCode::kZeroDirection: return "zero-direction";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kNotFixedPoint: return "not-a-fixed-point";
    case ErrorCode::kZeroScore: return "zero-score";
    case ErrorCode::kSizeGuard: return "size-guard";
    case ErrorCode::kResampleFailure: return "resample-failure";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
  }
  return "unknown";
}

}  // namespace dipca
