#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace critmass {

enum class ErrorKind {
  InvalidGrid,
  InvalidParams,
  DomainEscape,
  NoConvergence,
  ExponentMismatch,
  ZeroField,
  ZeroMass,
  ZeroKinetic,
  NotConverged,
  NumericalBlowup,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace critmass
