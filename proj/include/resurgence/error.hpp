#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resurgence {

/// Failure categories raised by the library. The CLI reports them by name.
enum class ErrorCode {
  RadiusExceeded,
  UndecidableNearOmega,
  DomainError,
  InvalidPath,
  OutOfDisc,
  SingularityOnPath,
  DiscChainUnderflow,
  PathBlocked,
  ToleranceNotMet,
  DeltaViolated,
  StepUnderflow,
  GridTooCoarse,
  ConstantTermPresent,
  InsufficientFamilyDepth,
  DegenerateLinearPart,
  ResidualCheckFailed,
  TruncationExceeded,
  ModeMismatch,
  OutsideHalfPlane,
  TailBoundUnavailable,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RadiusExceeded: return "RadiusExceeded";
    case ErrorCode::UndecidableNearOmega: return "UndecidableNearOmega";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidPath: return "InvalidPath";
    case ErrorCode::OutOfDisc: return "OutOfDisc";
    case ErrorCode::SingularityOnPath: return "SingularityOnPath";
    case ErrorCode::DiscChainUnderflow: return "DiscChainUnderflow";
    case ErrorCode::PathBlocked: return "PathBlocked";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::DeltaViolated: return "DeltaViolated";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::ConstantTermPresent: return "ConstantTermPresent";
    case ErrorCode::InsufficientFamilyDepth: return "InsufficientFamilyDepth";
    case ErrorCode::DegenerateLinearPart: return "DegenerateLinearPart";
    case ErrorCode::ResidualCheckFailed: return "ResidualCheckFailed";
    case ErrorCode::TruncationExceeded: return "TruncationExceeded";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::OutsideHalfPlane: return "OutsideHalfPlane";
    case ErrorCode::TailBoundUnavailable: return "TailBoundUnavailable";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace resurgence
