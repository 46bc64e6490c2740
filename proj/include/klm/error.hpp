#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace klm {

enum class ErrorCode {
  NotPrime,
  ZeroInverse,
  EvenModulus,
  EvenInput,
  ModulusMismatch,
  NotRational,
  ZeroParameter,
  BudgetExceeded,
  ExactLimitExceeded,
  AmbiguousRounding,
  MissingPowerSum,
  WrongConvention,
  UnsupportedDegree,
  EvenPrime,
  FractionalOrder,
  NotNormalized,
  TruncationTooShort,
  DivisibilityFailure,
  RangeFailure,
  PreconditionFailure,
  CacheCorrupt,
  InvalidInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::EvenModulus: return "EvenModulus";
    case ErrorCode::EvenInput: return "EvenInput";
    case ErrorCode::ModulusMismatch: return "ModulusMismatch";
    case ErrorCode::NotRational: return "NotRational";
    case ErrorCode::ZeroParameter: return "ZeroParameter";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ExactLimitExceeded: return "ExactLimitExceeded";
    case ErrorCode::AmbiguousRounding: return "AmbiguousRounding";
    case ErrorCode::MissingPowerSum: return "MissingPowerSum";
    case ErrorCode::WrongConvention: return "WrongConvention";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::EvenPrime: return "EvenPrime";
    case ErrorCode::FractionalOrder: return "FractionalOrder";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::TruncationTooShort: return "TruncationTooShort";
    case ErrorCode::DivisibilityFailure: return "DivisibilityFailure";
    case ErrorCode::RangeFailure: return "RangeFailure";
    case ErrorCode::PreconditionFailure: return "PreconditionFailure";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's JSON error object) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace klm
