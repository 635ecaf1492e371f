#include "aloe/common/error.hpp"

namespace aloe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::ProviderExhausted: return "ProviderExhausted";
    case ErrorCode::EmptyCompletion: return "EmptyCompletion";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::CountExceedsCross: return "CountExceedsCross";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::InductionParseFailure: return "InductionParseFailure";
    case ErrorCode::AgentMixParseFailure: return "AgentMixParseFailure";
    case ErrorCode::PositiveLogProb: return "PositiveLogProb";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateAbscissa: return "DegenerateAbscissa";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::InvalidRating: return "InvalidRating";
    case ErrorCode::EndpointFailure: return "EndpointFailure";
    case ErrorCode::RatingParseFailure: return "RatingParseFailure";
    case ErrorCode::NoCompletedCases: return "NoCompletedCases";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::MissingBinding:
      return ErrorCategory::Config;
    case ErrorCode::ProviderExhausted:
    case ErrorCode::EmptyCompletion:
    case ErrorCode::EndpointFailure:
      return ErrorCategory::Provider;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace aloe
