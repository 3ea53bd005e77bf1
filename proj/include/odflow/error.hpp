#pragma once

#include <stdexcept>
#include <string>

namespace odflow {

enum class ErrorCode {
  NoSuchYear,
  NoSuchVehicleClass,
  SingularDesign,
  ZeroVariancePredictor,
  ZeroVarianceResponse,
  NonPositiveResponse,
  NonPositiveValue,
  Unconverged,
  InsufficientData,
  InsufficientVariation,
  LpFailure,
  UnreachableNode,
  UndefinedCorrelation,
  ZeroVarianceColumn,
  ZeroVariance,
  DomainError,
  SchemaError,
  ParseError,
  ValidationError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoSuchYear: return "NoSuchYear";
    case ErrorCode::NoSuchVehicleClass: return "NoSuchVehicleClass";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::ZeroVariancePredictor: return "ZeroVariancePredictor";
    case ErrorCode::ZeroVarianceResponse: return "ZeroVarianceResponse";
    case ErrorCode::NonPositiveResponse: return "NonPositiveResponse";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::Unconverged: return "Unconverged";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InsufficientVariation: return "InsufficientVariation";
    case ErrorCode::LpFailure: return "LpFailure";
    case ErrorCode::UnreachableNode: return "UnreachableNode";
    case ErrorCode::UndefinedCorrelation: return "UndefinedCorrelation";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Library-wide exception type.  `code()` lets callers distinguish data
// problems (bad input files, missing years) from internal failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Data errors are caused by the input (schema violations, out-of-domain
  // values, requests for absent slices); everything else indicates a bug or
  // a numerical failure inside the library.
  bool is_data_error() const noexcept {
    switch (code_) {
      case ErrorCode::NoSuchYear:
      case ErrorCode::NoSuchVehicleClass:
      case ErrorCode::SchemaError:
      case ErrorCode::ParseError:
      case ErrorCode::ValidationError:
      case ErrorCode::InsufficientData:
      case ErrorCode::NonPositiveResponse:
      case ErrorCode::NonPositiveValue:
      case ErrorCode::IoError:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace odflow
