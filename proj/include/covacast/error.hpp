#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace covacast {

enum class ErrorCode {
  InvalidArgument,
  // core-domain
  RangeOutOfBounds,
  OverlappingRanges,
  HorizonTooLarge,
  // covariates
  RatioOutOfRange,
  // prompt-engine
  MissingCovariates,
  CovariateMisaligned,
  MissingKnowledgeText,
  NonFiniteValue,
  // llm-port
  BackendUnavailable,
  AuthMissing,
  MalformedResponse,
  UnparseablePrompt,
  // response-parser
  NoNumbersFound,
  CountMismatch,
  NonFiniteToken,
  // metrics
  LengthMismatch,
  EmptyInput,
  // baselines
  HistoryTooShort,
  InsufficientData,
  // experiment
  AllTasksFailed,
  EmptyRecordSet,
  SampleTooSmall,
  // dataset / cli
  MissingColumn,
  UnparseableTimestamp,
  NonNumericValue,
  FrequencyGap,
  EmptyLog,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is the
/// stable, machine-checkable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class CountMismatchError : public Error {
 public:
  CountMismatchError(std::size_t found, std::size_t expected);

  [[nodiscard]] std::size_t found() const noexcept { return found_; }
  [[nodiscard]] std::size_t expected() const noexcept { return expected_; }

 private:
  std::size_t found_;
  std::size_t expected_;
};

/// Dataset ingest error tied to a 1-based line of the input file.
class RowError : public Error {
 public:
  RowError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace covacast
