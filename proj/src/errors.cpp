#include "spinsurf/errors.hpp"

namespace spinsurf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::UnknownGeometry: return "UnknownGeometry";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::BadSector: return "BadSector";
    case ErrorKind::SectorNotConserved: return "SectorNotConserved";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateBulk: return "DegenerateBulk";
    case ErrorKind::ResolventSingular: return "ResolventSingular";
    case ErrorKind::BadSubset: return "BadSubset";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::InvalidDensity: return "InvalidDensity";
    case ErrorKind::Spec: return "SpecError";
    case ErrorKind::UnknownFigure: return "UnknownFigure";
    case ErrorKind::ResourceCap: return "ResourceCap";
  }
  return "Error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::ResolventSingular:
      return 2;
    case ErrorKind::TooLarge:
    case ErrorKind::ResourceCap:
      return 3;
    default:
      return 1;
  }
}

}  // namespace spinsurf
