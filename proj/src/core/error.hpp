#pragma once

#include <stdexcept>
#include <string>

namespace jobtitle {

enum class ErrorKind {
  Io,
  Parse,
  Validation,
  Parameter,
  Degenerate,
  Convergence,
  Integrity,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the core carries one of the kinds above; the C API
// maps them onto status codes and the CLI onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace jobtitle
