#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsg {

enum class ErrorCode {
  InvalidParams,
  NoConvergence,
  BracketFailure,
  NoGroundState,
  Ambiguous,
  Divergent,
  ConstraintViolated,
  SingularShift,
  NearSingular,
  EntryMismatch,
  RegimeMismatch,
  InsufficientWindow,
  InsufficientNeighbors,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::NoGroundState: return "NoGroundState";
    case ErrorCode::Ambiguous: return "Ambiguous";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::EntryMismatch: return "EntryMismatch";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::InsufficientWindow: return "InsufficientWindow";
    case ErrorCode::InsufficientNeighbors: return "InsufficientNeighbors";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qsg
