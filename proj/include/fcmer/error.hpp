#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fcmer {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteValue,
  ShapeMismatch,
  LengthMismatch,
  NonSymmetric,
  NotPositiveDefinite,
  EmptyInput,
  AllZeroWeights,
  NonFiniteScore,
  MetricMismatch,
  NonDecreasingObjective,
  Undefined,
  IdenticalIdealCenters,
  MissingTvGrid,
  IoError,
  ParseError,
  UnknownLabelColumn,
};

inline std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::NonDecreasingObjective: return "NonDecreasingObjective";
    case ErrorCode::Undefined: return "Undefined";
    case ErrorCode::IdenticalIdealCenters: return "IdenticalIdealCenters";
    case ErrorCode::MissingTvGrid: return "MissingTvGrid";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownLabelColumn: return "UnknownLabelColumn";
  }
  return "Unknown";
}

}  // namespace fcmer
