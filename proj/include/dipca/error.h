#pragma once

#include <stdexcept>
#include <string>

namespace dipca {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidData,
  kIndexOutOfRange,
  kDimensionMismatch,
  kDegenerateDirection,
  kZeroDirection,
  kRankDeficient,
  kNotFixedPoint,
  kZeroScore,
  kSizeGuard,
  kResampleFailure,
  kIo,
  kParse,
};

const char* to_string(ErrorCode code);

// Every precondition or numerical failure raised by the library carries a
// code so callers (the CLI in particular) can map it onto an outcome.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dipca
