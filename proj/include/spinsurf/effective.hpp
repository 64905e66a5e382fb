#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "spinsurf/eigensolver.hpp"
#include "spinsurf/entanglement.hpp"
#include "spinsurf/network.hpp"

namespace spinsurf {

enum class EffectiveMethod { SumOverStates, Resolvent, Auto };

/// Second-order surface model. lambda[a](j, k) is Lambda^a_jk for surface
/// positions j, k (indices into surface_sites), diagonal included.
///
///   H_eff = sum_a sum_{j<k} Lambda^a_jk s^a_j s^a_k + sum_a sum_j Lambda^a_jj / 2
///
/// The j = k terms multiply (s^a)^2 = 1 and only shift the energy.
struct EffectiveHamiltonian {
  std::vector<int> surface_sites;      // network site ids
  std::vector<int> attachments;        // bulk site ids
  std::vector<double> lambdas;         // lambda_j of each surface link
  std::vector<Coupling> k_couplings;   // K_j of each surface link
  std::array<Eigen::MatrixXd, 3> lambda;
  SymmetryClass symmetry;
  double bulk_energy = 0.0;
  double bulk_gap = 0.0;
  double validity_ratio = 0.0;         // bulk gap / (max lambda * max |K|)
  EffectiveMethod method = EffectiveMethod::Auto;

  int size() const { return static_cast<int>(surface_sites.size()); }
  /// sum_a sum_j Lambda^a_jj / 2.
  double self_energy() const;
};

/// Throws DegenerateBulk or ResolventSingular. Auto uses the dense sum over
/// states when the bulk dimension is at most 2^10 and the resolvent otherwise.
EffectiveHamiltonian effective_couplings(const SpinNetwork& net,
                                         EffectiveMethod method = EffectiveMethod::Auto,
                                         const SolverOptions& opts = {});

struct EffectiveGround {
  SpectrumResult spectrum;  // full spectrum of H_eff over the surface spins
  Vector ground;            // ground state in the 2^|S| basis (bit t = surface_sites[t])
  /// Surface density matrix of the ground manifold, sites labelled by network id.
  DensityMatrix density;
};

/// Dense diagonalization of H_eff. Throws BadSubset above 12 surface spins.
EffectiveGround effective_ground(const EffectiveHamiltonian& eff);

struct ValidationRow {
  double lambda = 0.0;
  double trace_distance = 0.0;
  double fidelity = 0.0;       // <psi_eff|rho_exact|psi_eff>, or Tr(rho_exact rho_eff) if H_eff is degenerate
  double exact_gap = 0.0;
  double effective_gap = 0.0;  // gap of H_eff at this lambda
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  std::optional<std::string> error;  // e.g. DegenerateBulk
  std::string error_kind;
  bool monotone_tail = true;         // trace distance non-increasing as lambda decreases
  bool converged = true;             // smallest-lambda trace distance < 0.05
  nlohmann::json to_json() const;
};

/// Compares the exact surface density matrix of H_T, with every surface
/// weight set to lambda, against the effective-model ground state.
ValidationReport validate_effective(const SpinNetwork& net, const std::vector<double>& lambda_grid,
                                    const SolverOptions& opts = {});

nlohmann::json to_json(const EffectiveHamiltonian& eff);

}  // namespace spinsurf
