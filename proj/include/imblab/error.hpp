#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imblab {

enum class ErrorCode {
  NotPositiveDefinite,
  InvalidRatio,
  InvalidArgument,
  EmptyClass,
  DegenerateMinority,
  DimensionMismatch,
  NonFiniteLoss,
  WrongParadigm,
  SampleTooSmall,
  LengthMismatch,
  InvalidLabel,
  EmptyInput,
  MissingClass,
  ParseError,
  ValidationError,
  IoError,
  NoData,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::InvalidRatio: return "InvalidRatio";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::DegenerateMinority: return "DegenerateMinority";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::WrongParadigm: return "WrongParadigm";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoData: return "NoData";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace imblab
