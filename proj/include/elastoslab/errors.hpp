#pragma once

#include <stdexcept>
#include <string>

namespace elastoslab {

/// Failure categories raised by the library. Every thrown Error carries one.
enum class ErrorKind {
  GridMismatch,
  DegenerateMap,
  PreconditionViolated,
  SolverDiverged,
  NotMeanZero,
  ProjectionIncompatible,
  InsufficientHistory,
  CeilingViolated,
  StabilityLost,
  ConfigInvalid,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::NotMeanZero: return "NotMeanZero";
    case ErrorKind::ProjectionIncompatible: return "ProjectionIncompatible";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::CeilingViolated: return "CeilingViolated";
    case ErrorKind::StabilityLost: return "StabilityLost";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace elastoslab
