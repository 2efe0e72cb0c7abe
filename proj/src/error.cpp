#include "exogait/error.hpp"

namespace exogait {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedProcessor: return "UnsupportedProcessor";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::MissingRequiredParameter: return "MissingRequiredParameter";
    case ErrorCode::TooManyMarkers: return "TooManyMarkers";
    case ErrorCode::EmptyTrial: return "EmptyTrial";
    case ErrorCode::BadHeaderRow: return "BadHeaderRow";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::UnknownEventLabel: return "UnknownEventLabel";
    case ErrorCode::TooFewValidFrames: return "TooFewValidFrames";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonUniformSampling: return "NonUniformSampling";
    case ErrorCode::StrideOutsideSeries: return "StrideOutsideSeries";
    case ErrorCode::GapInStride: return "GapInStride";
    case ErrorCode::MissingFootOff: return "MissingFootOff";
    case ErrorCode::MixedVariables: return "MixedVariables";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::TimeWentBackwards: return "TimeWentBackwards";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::AllWeightsZero: return "AllWeightsZero";
  }
  return "Unknown";
}

}  // namespace exogait
