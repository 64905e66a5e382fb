#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spinsurf/basis.hpp"
#include "spinsurf/network.hpp"
#include "spinsurf/operator.hpp"

namespace spinsurf {

struct SolverOptions {
  double tol = 1e-12;                    // Lanczos residual, relative to the norm estimate
  int krylov_dim = 48;                   // basis size between thick restarts
  int max_restarts = 4000;
  std::uint64_t seed = 20130205;
  std::size_t dense_cap = std::size_t{1} << 14;       // dense_spectrum refuses larger operators
  std::size_t dense_threshold = 600;                  // sectors this small are solved densely
  std::size_t max_dim = std::size_t{1} << 20;         // cap on the full Hilbert space 2^n
  double degeneracy_rel = 1e-10;         // E1 - E0 < rel * max(1, |E0|) counts as degenerate
  bool deflation_check = true;           // extra Lanczos pass to catch missed degenerate copies
};

/// Lowest part of a spectrum. When produced by ground_and_gap each eigenpair
/// also records the sector basis its vector lives in.
struct SpectrumResult {
  std::vector<double> eigenvalues;  // ascending
  std::vector<Vector> eigenvectors;
  std::vector<double> residual_norms;
  std::vector<std::shared_ptr<const SectorBasis>> bases;

  double gap = 0.0;
  bool ground_degenerate = false;
  double degeneracy_threshold = 0.0;
  double norm_estimate = 0.0;
  std::uint64_t seed = 0;
  std::size_t matvecs = 0;
  std::vector<std::string> sectors;  // sectors examined, in order

  double ground_energy() const { return eigenvalues.front(); }
  /// Number of leading eigenpairs within the degeneracy threshold of E0.
  std::size_t ground_multiplicity() const;
};

/// Full spectrum by direct symmetric diagonalization. Throws TooLarge above `cap`.
SpectrumResult dense_spectrum(const SparseOperator& op,
                              std::size_t cap = SolverOptions{}.dense_cap);

/// Lowest k eigenpairs (k clamped to the dimension). Deterministic for a given
/// seed. Throws NoConvergence with the best residuals when the restart cap is hit.
SpectrumResult lanczos_spectrum(const SparseOperator& op, int k, double tol, std::uint64_t seed,
                                const SolverOptions& opts = {});

/// Lowest levels of a bond Hamiltonian on n sites using the sector policy:
/// magnetization sectors 0 and +-2 (outward while they still reach below E1)
/// when Jx == Jy everywhere, otherwise the full basis.
SpectrumResult lowest_levels(int n_sites, const std::vector<Bond>& bonds,
                             const SolverOptions& opts = {});

/// Ground state and global gap of H_T. Throws DegenerateBulk when H_B alone has
/// a degenerate ground state.
SpectrumResult ground_and_gap(const SpinNetwork& net, const SolverOptions& opts = {});

/// Spectrum of the bulk Hamiltonian alone, with the same sector policy.
SpectrumResult bulk_levels(const SpinNetwork& net, const SolverOptions& opts = {});

}  // namespace spinsurf
