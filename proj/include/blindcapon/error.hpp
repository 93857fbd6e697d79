#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blindcapon {

enum class ErrorCode {
  InvalidArgument,
  SingularCovariance,
  DegenerateSignal,
  ScoreDegenerate,
  Diverged,
  DomainError,
  SingularFim,
  RankDeficient,
  NotConverged,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the Monte Carlo harness in particular) can record it per trial.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::ScoreDegenerate: return "ScoreDegenerate";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularFim: return "SingularFim";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace blindcapon
