#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aloe {

enum class ErrorCode {
  // gateway
  MissingBinding,
  ProviderExhausted,
  EmptyCompletion,
  DimensionMismatch,
  // persona pool
  ParseFailure,
  CountExceedsCross,
  // dialogue tree
  IndexOutOfRange,
  SchemaViolation,
  // dataset builder
  InductionParseFailure,
  // training export
  AgentMixParseFailure,
  PositiveLogProb,
  LengthMismatch,
  // metrics
  DegenerateAbscissa,
  MissingScore,
  InvalidRating,
  // evaluation
  EndpointFailure,
  RatingParseFailure,
  NoCompletedCases,
  // shared
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

enum class ErrorCategory { Config, Provider, Data };

// Coarse grouping used for process exit codes.
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace aloe
