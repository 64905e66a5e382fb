#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spinsurf/network.hpp"

namespace spinsurf {

/// Parameters shared by the geometry catalog. Unused fields are ignored by a
/// given geometry.
struct GeometryParams {
  double lambda = 0.1;                 // primary surface weight
  std::optional<double> lambda_prime;  // second pair (nested/double square); default lambda^2
  std::optional<double> ratio;         // ring8 hierarchy lambda_p = lambda * ratio^p; default lambda
  Coupling bulk{1.0, 1.0, 0.0};        // J for bulk-bulk bonds
  Coupling surface{1.0, 1.0, 0.0};     // K for surface links
  bool ferro = false;                  // negate every coupling
  int n_bulk = 6;                      // ring
  int blocks = 2;                      // modular
};

/// Couplings for the named model ("xx", "xxz", "xxx", "ising"), J normalized to 1.
/// "xxz" is the 2Jz = Jx = Jy convention.
Coupling model_coupling(const std::string& model);

/// Builds a catalog network. Throws UnknownGeometry or BadParams.
SpinNetwork make_geometry(const std::string& name, const GeometryParams& params = {});

const std::vector<std::string>& geometry_names();

/// File stem used for the shipped copy of a catalog entry built with default params.
struct CatalogEntry {
  std::string file_stem;
  std::string geometry;
  GeometryParams params;
};
std::vector<CatalogEntry> default_catalog();

void write_catalog(const std::filesystem::path& dir);

}  // namespace spinsurf
