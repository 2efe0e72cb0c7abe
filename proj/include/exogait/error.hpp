#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exogait {

enum class ErrorCode {
  InvalidArgument,
  // c3d_io
  MalformedHeader,
  UnsupportedProcessor,
  TruncatedData,
  MissingRequiredParameter,
  TooManyMarkers,
  EmptyTrial,
  BadHeaderRow,
  RaggedRows,
  NonNumericCell,
  UnknownEventLabel,
  // preprocess
  TooFewValidFrames,
  SeriesTooShort,
  NonUniformSampling,
  // gait_cycle
  StrideOutsideSeries,
  GapInStride,
  MissingFootOff,
  MixedVariables,
  // equivalence_stats
  SingularDesign,
  DidNotConverge,
  // assist_profile
  InvalidProfile,
  // gait_phase
  TimeWentBackwards,
  // tension_loop
  NonFiniteState,
  EmptyResult,
  // complexity
  AllWeightsZero,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace exogait
