#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dacsim {

enum class ErrorKind {
  TooFewAgents,
  MalformedEdge,
  DisconnectedGraph,
  IndexOutOfRange,
  NonFiniteParameter,
  LengthMismatch,
  NonPositiveRange,
  SparsityViolation,
  StabilityGuardViolated,
  NonFiniteState,
  InsufficientTransient,
  NonUniformSampling,
  TargetInCoalition,
  NotZeroSum,
  NotAnEdge,
  NeighborInCoalition,
  NonPositiveCoupling,
  ConfigInvalid,
  Io,
};

std::string_view errorKindName(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dacsim
