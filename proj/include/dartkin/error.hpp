#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dartkin {

/// Failure categories. The CLI maps each onto a distinct exit status.
enum class ErrorCode {
  InvalidArgument,
  Parse,
  InsufficientData,
  NoDetection,
  ConfigDefect,
  NotFound,
  Numerical,
  Io,
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::NoDetection: return "no detection";
    case ErrorCode::ConfigDefect: return "configuration defect";
    case ErrorCode::NotFound: return "not found";
    case ErrorCode::Numerical: return "numerical failure";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace dartkin
