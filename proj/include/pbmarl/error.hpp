#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pbmarl {

enum class ErrorKind {
  // .pb parsing
  MissingSection,
  DuplicateProjectId,
  DuplicateVoterId,
  MalformedRow,
  NonNumericCost,
  // election construction
  MissingBudget,
  EmptyImpactAreas,
  TokenCountMissing,
  BallotExceedsTokens,
  UnknownProject,
  NoAffordableProject,
  // model
  IndexOutOfRange,
  UnknownWinnerProject,
  ZeroVotesOnOwnVotedWinner,
  ZeroDimension,
  DimensionMismatch,
  ShapeMismatch,
  EmptyBatch,
  EmptyBuffer,
  EmptyInput,
  TooFewProjects,
  // orchestration
  ConfigError,
  DataError,
  ReportInput,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingSection: return "MissingSection";
    case ErrorKind::DuplicateProjectId: return "DuplicateProjectId";
    case ErrorKind::DuplicateVoterId: return "DuplicateVoterId";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonNumericCost: return "NonNumericCost";
    case ErrorKind::MissingBudget: return "MissingBudget";
    case ErrorKind::EmptyImpactAreas: return "EmptyImpactAreas";
    case ErrorKind::TokenCountMissing: return "TokenCountMissing";
    case ErrorKind::BallotExceedsTokens: return "BallotExceedsTokens";
    case ErrorKind::UnknownProject: return "UnknownProject";
    case ErrorKind::NoAffordableProject: return "NoAffordableProject";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::UnknownWinnerProject: return "UnknownWinnerProject";
    case ErrorKind::ZeroVotesOnOwnVotedWinner: return "ZeroVotesOnOwnVotedWinner";
    case ErrorKind::ZeroDimension: return "ZeroDimension";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::EmptyBuffer: return "EmptyBuffer";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewProjects: return "TooFewProjects";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::DataError: return "DataError";
    case ErrorKind::ReportInput: return "ReportInput";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` identifies the failure.
/// `line()` is the 1-based input line for parse errors, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t line = 0)
      : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

  /// True for failures caused by the input election data.
  bool is_data_error() const noexcept {
    switch (kind_) {
      case ErrorKind::MissingSection:
      case ErrorKind::DuplicateProjectId:
      case ErrorKind::DuplicateVoterId:
      case ErrorKind::MalformedRow:
      case ErrorKind::NonNumericCost:
      case ErrorKind::MissingBudget:
      case ErrorKind::EmptyImpactAreas:
      case ErrorKind::TokenCountMissing:
      case ErrorKind::BallotExceedsTokens:
      case ErrorKind::UnknownProject:
      case ErrorKind::NoAffordableProject:
      case ErrorKind::DataError:
        return true;
      default:
        return false;
    }
  }

 private:
  static std::string format(ErrorKind kind, const std::string& message, std::size_t line) {
    std::string out(to_string(kind));
    if (line != 0) out += " (line " + std::to_string(line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace pbmarl
