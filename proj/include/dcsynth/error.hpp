#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dcsynth {

enum class ErrorKind {
  Parse,
  Validation,
  DegenerateRoom,
  UnknownModel,
  EmptyRoom,
  NoAcu,
  Nonphysical,
  ZeroItPower,
  Degenerate,
  EmptyCategory,
  NonFiniteGradient,
  InfeasibleRequirement,
  EndpointUnreachable,
  Auth,
  Config,
  EmptyBatch,
  InvalidScene,
  SeriesMismatch,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` is what callers branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::DegenerateRoom: return "degenerate_room";
    case ErrorKind::UnknownModel: return "unknown_model";
    case ErrorKind::EmptyRoom: return "empty_room";
    case ErrorKind::NoAcu: return "no_acu";
    case ErrorKind::Nonphysical: return "nonphysical";
    case ErrorKind::ZeroItPower: return "zero_it_power";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::EmptyCategory: return "empty_category";
    case ErrorKind::NonFiniteGradient: return "non_finite_gradient";
    case ErrorKind::InfeasibleRequirement: return "infeasible_requirement";
    case ErrorKind::EndpointUnreachable: return "endpoint_unreachable";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::Config: return "config";
    case ErrorKind::EmptyBatch: return "empty_batch";
    case ErrorKind::InvalidScene: return "invalid_scene";
    case ErrorKind::SeriesMismatch: return "series_mismatch";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace dcsynth
