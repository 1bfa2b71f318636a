#include "critmass/error.hpp"

namespace critmass {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::DomainEscape: return "DomainEscape";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ExponentMismatch: return "ExponentMismatch";
    case ErrorKind::ZeroField: return "ZeroField";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::ZeroKinetic: return "ZeroKinetic";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::NumericalBlowup: return "NumericalBlowup";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace critmass
