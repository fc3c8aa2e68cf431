#pragma once

#include <stdexcept>
#include <string>

namespace stkern {

enum class ErrorCode {
  // dataset / geometry
  CoordinateOutOfRange,
  NonIncreasingTime,
  DuplicateLocation,
  DimensionMismatch,
  DegenerateRange,
  // basis
  UnsupportedCount,
  IndexOutOfRange,
  // aggregation
  EmptyLocations,
  ResolutionTooFine,
  // estimation
  NoNeighbors,
  DegenerateSupport,
  InvalidTruncation,
  InvalidLocation,
  InsufficientLocations,
  // covariance recovery
  QuadratureOverflow,
  IllConditionedSystem,
  NoConvergence,
  // inference
  InvalidM,
  QueriesTooClose,
  // io / cli
  ParseError,
  JoinError,
  FirstTimepointUnavailable,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Exit-code category used by the CLI: 3 for data errors, 4 for numerical ones.
  int exit_category() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace stkern
