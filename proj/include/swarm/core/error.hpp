#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swarm {

enum class ErrorCode {
  kInvalidControl,
  kInvalidConfig,
  kStructuralDeadlock,
  kNonFinite,
  kMissingCheckpoint,
  kIo,
  kFormat,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidControl: return "invalid-control";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kStructuralDeadlock: return "structural-deadlock";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kMissingCheckpoint: return "missing-checkpoint";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

// Every library failure surfaces as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace swarm
