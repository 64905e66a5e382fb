#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinsurf/eigensolver.hpp"
#include "spinsurf/geometry.hpp"
#include "spinsurf/network.hpp"

namespace spinsurf {

/// Parameter sweep description.
///
/// parameter: lambda | lambda2 | kz | jz | size | blocks | ratio.
/// observables: concurrence[:a,b] (site labels or ids; default the first two
/// surface sites), gap, energy, fidelity:z0 (needs four surface spins),
/// residual_tangle:j (on the effective-model ground state, j a surface label
/// or id), trace_distance (exact vs effective surface state).
struct SweepSpec {
  std::string geometry;                 // catalog key; ignored when `network` is set
  GeometryParams params;
  std::optional<SpinNetwork> network;   // fixed network; only the lambda sweep applies
  std::string parameter = "lambda";
  std::vector<double> grid;
  bool kz_sets_bulk = false;            // kz sweep also sets the bulk Jz
  std::vector<std::string> observables;
  SolverOptions solver;
  unsigned threads = 1;

  /// Throws SpecError when the grid is empty or not strictly monotone, the
  /// parameter is unknown, or an observable is malformed.
  void validate() const;
  nlohmann::json to_json() const;
};

struct PointDiagnostics {
  std::string status = "ok";           // "ok" or an error kind name
  std::string message;
  std::uint64_t network_hash = 0;
  int n_sites = 0;
  bool ground_degenerate = false;
  double max_residual = 0.0;
  std::size_t matvecs = 0;
  std::vector<std::string> sectors;
};

struct SweepTable {
  std::string parameter;
  std::vector<std::string> columns;    // observable names, in request order
  std::vector<double> grid;
  std::vector<std::vector<double>> values;  // values[row][column]; NaN on failure
  std::vector<PointDiagnostics> diagnostics;

  /// Index of an observable column. Throws SpecError.
  std::size_t column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
};

struct RunManifest {
  std::string tool_version;
  SweepSpec spec;
  std::vector<PointDiagnostics> points;
  double wall_seconds = 0.0;

  /// Everything except wall-clock time.
  nlohmann::json reproducible_json() const;
  nlohmann::json to_json() const;
  std::string hash_hex() const;
};

struct SweepResult {
  SweepTable table;
  RunManifest manifest;
};

/// One row per grid point, in grid order. Failures at a point are recorded
/// in its diagnostics and leave NaN values.
SweepResult run_sweep(const SweepSpec& spec);

/// Network for one grid point of a spec.
SpinNetwork network_at(const SweepSpec& spec, double value);

void write_csv(const SweepResult& result, std::ostream& out);
void write_json(const SweepResult& result, std::ostream& out);

/// logspace(lo, hi, n): n points geometrically spaced from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, int n);
/// lo, lo+step, ... up to hi (inclusive within step/2).
std::vector<double> linspace_step(double lo, double hi, double step);
std::vector<double> default_lambda_grid();

struct FigureOptions {
  SolverOptions solver;
  unsigned threads = 1;
  int max_ring = 0;      // largest ring bulk for figure 3; 0 means the dimension cap
  int max_blocks = 5;    // figure 5
};

/// Writes the CSV series of figure n plus a gnuplot script into `dir`.
/// Returns the written paths. Throws UnknownFigure.
std::vector<std::filesystem::path> figure(int n, const std::filesystem::path& dir,
                                          const FigureOptions& opts = {});

/// Presets of a figure as sweep specs (one per CSV series), with file stems.
std::vector<std::pair<std::string, SweepSpec>> figure_specs(int n, const FigureOptions& opts = {});

struct FrustrationTable {
  std::vector<double> lambda;
  std::vector<double> square_antiferro, square_ferro;
  std::vector<double> pentagon_antiferro, pentagon_ferro;
  /// C_antiferro <= C_ferro at every grid point inside [0.05, 0.5], both shapes.
  bool antiferro_below_ferro = true;
};

FrustrationTable compare_frustration(const std::vector<double>& lambda_grid,
                                     const SolverOptions& opts = {}, unsigned threads = 1);
void write_csv(const FrustrationTable& table, std::ostream& out);

}  // namespace spinsurf
