#pragma once

#include <stdexcept>
#include <string>

namespace tsrkit {

/// Distinguishes bad inputs (malformed files, failed validation, infeasible
/// requests) from violations of the library's own invariants.
enum class ErrorKind { InvalidInput, Internal };

class TsrError : public std::runtime_error {
 public:
  TsrError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw TsrError(ErrorKind::InvalidInput, what);
}

[[noreturn]] inline void throw_internal(const std::string& what) {
  throw TsrError(ErrorKind::Internal, what);
}

}  // namespace tsrkit
