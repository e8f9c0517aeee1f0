#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rose {

enum class ErrorCode {
  kNotSquare,
  kAsymmetryExceedsTolerance,
  kNotPositiveDefinite,
  kDimensionMismatch,
  kIndefiniteKernel,
  kInvalidArgument,
  kEmptyInput,
  kNonConvergence,
  kDegenerateDirection,
  kTSampleTooLarge,
  kImageTooSmall,
  kRegionTooSmall,
  kGridTooFine,
  kSingleClass,
  kEmptyData,
  kEmptyTrain,
  kFileNotFound,
  kParseError,
  kDimensionInconsistency,
  kExclusionExceedsClasses,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rose
