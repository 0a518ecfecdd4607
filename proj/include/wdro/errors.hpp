#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdro {

enum class ErrorKind {
  MalformedProgram,
  NumericalBreakdown,
  EmptySupport,
  NormUnsupported,
  HypothesisViolated,
  UnboundedPolyhedron,
  TooLarge,
  RecourseSetUnbounded,
  DualPolytopeUnbounded,
  SupportNotFullSpace,
  EscapingMassPresent,
  DimensionMismatch,
  SlopeTooLarge,
  InvalidBeta,
  GridEmpty,
  DatasetTooSmall,
  NoCoveringRadius,
  InvalidConfig,
  ParseError,
  SampleOutsideSupport,
  SolveFailed,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::MalformedProgram: return "MalformedProgram";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::NormUnsupported: return "NormUnsupported";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::UnboundedPolyhedron: return "UnboundedPolyhedron";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::RecourseSetUnbounded: return "RecourseSetUnbounded";
    case ErrorKind::DualPolytopeUnbounded: return "DualPolytopeUnbounded";
    case ErrorKind::SupportNotFullSpace: return "SupportNotFullSpace";
    case ErrorKind::EscapingMassPresent: return "EscapingMassPresent";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SlopeTooLarge: return "SlopeTooLarge";
    case ErrorKind::InvalidBeta: return "InvalidBeta";
    case ErrorKind::GridEmpty: return "GridEmpty";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::NoCoveringRadius: return "NoCoveringRadius";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SampleOutsideSupport: return "SampleOutsideSupport";
    case ErrorKind::SolveFailed: return "SolveFailed";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace wdro
