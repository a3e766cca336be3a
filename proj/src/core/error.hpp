#pragma once

#include <stdexcept>
#include <string>

namespace lirec {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// invalid -> bad config/arguments (exit 1), io/runtime -> failures (exit 2).
enum class ErrorKind { invalid, io, runtime };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}
[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw Error(ErrorKind::runtime, msg);
}

}  // namespace lirec
