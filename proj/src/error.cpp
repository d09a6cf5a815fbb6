#include "dacsim/error.hpp"

namespace dacsim {

std::string_view errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TooFewAgents: return "TooFewAgents";
    case ErrorKind::MalformedEdge: return "MalformedEdge";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonPositiveRange: return "NonPositiveRange";
    case ErrorKind::SparsityViolation: return "SparsityViolation";
    case ErrorKind::StabilityGuardViolated: return "StabilityGuardViolated";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::InsufficientTransient: return "InsufficientTransient";
    case ErrorKind::NonUniformSampling: return "NonUniformSampling";
    case ErrorKind::TargetInCoalition: return "TargetInCoalition";
    case ErrorKind::NotZeroSum: return "NotZeroSum";
    case ErrorKind::NotAnEdge: return "NotAnEdge";
    case ErrorKind::NeighborInCoalition: return "NeighborInCoalition";
    case ErrorKind::NonPositiveCoupling: return "NonPositiveCoupling";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dacsim
