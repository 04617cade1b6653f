#ifndef NHYP_ERROR_HPP
#define NHYP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace nhyp {

enum class ErrorKind {
  // spec / input errors
  MissingKey,
  UnknownKey,
  MalformedNumber,
  NonPositiveDiffusion,
  NonzeroConstantTerm,
  InvalidArgument,
  DomainError,
  // structural analysis
  DegenerateSignChange,
  ZeroPolynomial,
  NotConstantA,
  DegenerateCritical,
  LevelTooCloseToCritical,
  // numerical failures
  BlowUp,
  StepUnderflow,
  GridTooCoarse,
  CriticalPointLost,
  ContinuationLost,
  TangencyUnresolved,
  // reporting
  EmptyReport,
  IoError,
};

inline constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::MissingKey: return "MissingKey";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::MalformedNumber: return "MalformedNumber";
    case ErrorKind::NonPositiveDiffusion: return "NonPositiveDiffusion";
    case ErrorKind::NonzeroConstantTerm: return "NonzeroConstantTerm";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateSignChange: return "DegenerateSignChange";
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::NotConstantA: return "NotConstantA";
    case ErrorKind::DegenerateCritical: return "DegenerateCritical";
    case ErrorKind::LevelTooCloseToCritical: return "LevelTooCloseToCritical";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::CriticalPointLost: return "CriticalPointLost";
    case ErrorKind::ContinuationLost: return "ContinuationLost";
    case ErrorKind::TangencyUnresolved: return "TangencyUnresolved";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// True for errors caused by the user's input rather than by the numerics.
inline constexpr bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::MissingKey:
    case ErrorKind::UnknownKey:
    case ErrorKind::MalformedNumber:
    case ErrorKind::NonPositiveDiffusion:
    case ErrorKind::NonzeroConstantTerm:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DomainError:
    case ErrorKind::DegenerateSignChange:
    case ErrorKind::ZeroPolynomial:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Location at which an integration escaped the growth cap.
class BlowUpError : public Error {
 public:
  BlowUpError(double x, const std::string& what) : Error(ErrorKind::BlowUp, what), x_(x) {}
  double location() const noexcept { return x_; }

 private:
  double x_;
};

}  // namespace nhyp

#endif  // NHYP_ERROR_HPP
