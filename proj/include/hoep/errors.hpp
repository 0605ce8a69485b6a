#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hoep {

enum class ErrorCode {
  AntisymmetryViolation,
  JacobiViolation,
  DegenerateMetric,
  BasisMismatch,
  DimensionMismatch,
  NoMatrixBasis,
  LogDomain,
  IndexNotDominated,
  StencilTooWide,
  NonFiniteLagrangian,
  NotFlat,
  NotBiInvariant,
  LineSearchStalled,
  Precondition,
  Parse,
  Validation,
  Io,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::AntisymmetryViolation: return "AntisymmetryViolation";
    case ErrorCode::JacobiViolation: return "JacobiViolation";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoMatrixBasis: return "NoMatrixBasis";
    case ErrorCode::LogDomain: return "LogDomain";
    case ErrorCode::IndexNotDominated: return "IndexNotDominated";
    case ErrorCode::StencilTooWide: return "StencilTooWide";
    case ErrorCode::NonFiniteLagrangian: return "NonFiniteLagrangian";
    case ErrorCode::NotFlat: return "NotFlat";
    case ErrorCode::NotBiInvariant: return "NotBiInvariant";
    case ErrorCode::LineSearchStalled: return "LineSearchStalled";
    case ErrorCode::Precondition: return "PreconditionError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Validation: return "ValidationError";
    case ErrorCode::Io: return "IoError";
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

}  // namespace hoep
