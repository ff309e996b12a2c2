#include "covacast/error.hpp"

namespace covacast {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RangeOutOfBounds: return "RangeOutOfBounds";
    case ErrorCode::OverlappingRanges: return "OverlappingRanges";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::MissingCovariates: return "MissingCovariates";
    case ErrorCode::CovariateMisaligned: return "CovariateMisaligned";
    case ErrorCode::MissingKnowledgeText: return "MissingKnowledgeText";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::UnparseablePrompt: return "UnparseablePrompt";
    case ErrorCode::NoNumbersFound: return "NoNumbersFound";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::NonFiniteToken: return "NonFiniteToken";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::HistoryTooShort: return "HistoryTooShort";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::AllTasksFailed: return "AllTasksFailed";
    case ErrorCode::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableTimestamp: return "UnparseableTimestamp";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::FrequencyGap: return "FrequencyGap";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

CountMismatchError::CountMismatchError(std::size_t found, std::size_t expected)
    : Error(ErrorCode::CountMismatch,
            "found " + std::to_string(found) + " values, expected " + std::to_string(expected)),
      found_(found),
      expected_(expected) {}

}  // namespace covacast
