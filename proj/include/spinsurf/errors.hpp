#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinsurf {

enum class ErrorKind {
  Parse,
  Validation,
  UnknownGeometry,
  BadParams,
  BadSector,
  SectorNotConserved,
  DimensionMismatch,
  ZeroVector,
  TooLarge,
  NoConvergence,
  DegenerateBulk,
  ResolventSingular,
  BadSubset,
  BadDimension,
  NotNormalized,
  InvalidDensity,
  Spec,
  UnknownFigure,
  ResourceCap,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for the CLI: 1 validation-like, 2 convergence, 3 resource cap.
int exit_code(ErrorKind kind);

/// Single exception type carrying a machine-readable kind.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace spinsurf
