#pragma once

#include <stdexcept>
#include <string>

namespace spdelab {

enum class ErrorCode {
  InvalidArgument,
  Unsupported,
  ZeroDenominator,
  MissingProvenance,
  Parse,
  Io,
  Runtime,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a code so the C boundary can
// map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace spdelab
