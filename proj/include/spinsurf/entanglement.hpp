#pragma once

#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "spinsurf/basis.hpp"
#include "spinsurf/eigensolver.hpp"
#include "spinsurf/operator.hpp"

namespace spinsurf {

/// Reduced density matrix over `sites`. Row/column bit t is site sites[t],
/// with the same up = 1 convention as SectorBasis.
struct DensityMatrix {
  std::vector<int> sites;
  Eigen::MatrixXcd matrix;
  nlohmann::json source;  // provenance: network hash, lambdas, seed

  int n_sites() const { return static_cast<int>(sites.size()); }
  /// Throws InvalidDensity when trace, hermiticity or positivity fail at `tol`.
  void check(double tol = 1e-10) const;
};

inline constexpr int kMaxReducedSites = 12;

/// Partial trace of |psi><psi| onto `keep`. `state` is expressed in `basis`
/// and must be normalized. Throws BadSubset or NotNormalized.
DensityMatrix reduce(const Vector& state, const SectorBasis& basis, const std::vector<int>& keep);

/// Reduces a density matrix further onto a subset of its own sites (given as
/// site ids, which must all belong to rho.sites).
DensityMatrix reduce(const DensityMatrix& rho, const std::vector<int>& keep);

/// Equal-weight mixture over the degenerate ground manifold of `spectrum`
/// (the ground state itself when it is unique).
DensityMatrix ground_density(const SpectrumResult& spectrum, const std::vector<int>& keep);

/// Wootters concurrence of a two-site density matrix. Throws BadDimension.
double concurrence(const DensityMatrix& rho);

/// 4 det(rho) for a single site, clamped to [0, 1]. Throws BadDimension.
double tangle_single(const DensityMatrix& rho);

/// T_j - sum_{k != j} C_jk^2 for a pure state on n sites given in the full
/// 2^n basis. Throws NotNormalized or BadSubset.
double residual_tangle(const Vector& state, int j);

/// (1/sqrt 6) times the sum of the six 4-bit labels with two bits set.
Vector make_z0();

/// <target|rho|target>. Throws DimensionMismatch.
double fidelity(const DensityMatrix& rho, const Vector& target);

/// (1/2) sum |eig(rho - sigma)|. Throws DimensionMismatch.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// |psi><psi| on sites 0..n-1 of a full-basis vector.
DensityMatrix pure_density(const Vector& state);

}  // namespace spinsurf
