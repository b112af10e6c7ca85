#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectral_type {

enum class ErrorKind {
  InvalidArgument,
  NonConvergence,
  NonFinite,
  InvalidBracket,
  InsufficientSamples,
  OutOfSupportedRange,
  BracketingFailure,
  SingularMass,
  NoConvergence,
  StiffnessFailure,
  ZeroDenominator,
  InconclusiveTail,
  MeaninglessConstant,
  InvariantViolation,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidBracket: return "InvalidBracket";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::OutOfSupportedRange: return "OutOfSupportedRange";
    case ErrorKind::BracketingFailure: return "BracketingFailure";
    case ErrorKind::SingularMass: return "SingularMass";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::StiffnessFailure: return "StiffnessFailure";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::InconclusiveTail: return "InconclusiveTail";
    case ErrorKind::MeaninglessConstant: return "MeaninglessConstant";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace spectral_type
