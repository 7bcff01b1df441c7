#include "dualvote/errors.hpp"

namespace dualvote {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::NotInRegion2: return "NotInRegion2";
    case ErrorKind::NotBistable: return "NotBistable";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateRoots: return "DegenerateRoots";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NoPositiveRoots: return "NoPositiveRoots";
    case ErrorKind::ExplosionGuard: return "ExplosionGuard";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::EmptyEstimate: return "EmptyEstimate";
    case ErrorKind::RateOverflow: return "RateOverflow";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::RangeEscape: return "RangeEscape";
    case ErrorKind::FrontLost: return "FrontLost";
    case ErrorKind::Extinct: return "Extinct";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace dualvote
