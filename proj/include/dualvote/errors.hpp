#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dualvote {

enum class ErrorKind {
  InvalidSpec,
  NotInRegion2,
  NotBistable,
  DomainError,
  DegenerateRoots,
  CapExceeded,
  NoPositiveRoots,
  ExplosionGuard,
  ArityMismatch,
  EmptyEstimate,
  RateOverflow,
  StabilityViolation,
  RangeEscape,
  FrontLost,
  Extinct,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and tests)
// can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) raise(kind, message);
}

}  // namespace dualvote
