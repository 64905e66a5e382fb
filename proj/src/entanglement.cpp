#include "spinsurf/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "spinsurf/errors.hpp"

namespace spinsurf {

using Eigen::Index;
using Eigen::MatrixXcd;
using cplx = std::complex<double>;

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kClamp = 1e-10;

void check_subset(const std::vector<int>& keep, int n_sites) {
  if (keep.empty()) fail(ErrorKind::BadSubset, "empty site subset");
  if (static_cast<int>(keep.size()) > kMaxReducedSites) {
    fail(ErrorKind::BadSubset, "at most " + std::to_string(kMaxReducedSites) + " sites may be kept");
  }
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail(ErrorKind::BadSubset, "repeated site in subset");
  }
  if (sorted.front() < 0 || sorted.back() >= n_sites) {
    fail(ErrorKind::BadSubset, "site outside 0.." + std::to_string(n_sites - 1));
  }
}

/// Eigenvalues of a Hermitian matrix with tiny negatives clamped to zero.
Eigen::VectorXd clamped_spectrum(const MatrixXcd& m, Eigen::MatrixXcd* vectors = nullptr) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(m);
  Eigen::VectorXd w = eig.eigenvalues();
  for (Index k = 0; k < w.size(); ++k) {
    if (w[k] < -kClamp) {
      fail(ErrorKind::InvalidDensity, "density matrix has eigenvalue " + std::to_string(w[k]));
    }
    if (w[k] < 0.0) w[k] = 0.0;
  }
  if (vectors) *vectors = eig.eigenvectors();
  return w;
}

}  // namespace

void DensityMatrix::check(double tol) const {
  const Index dim = Index{1} << sites.size();
  if (matrix.rows() != dim || matrix.cols() != dim) {
    fail(ErrorKind::InvalidDensity, "density matrix size does not match its site list");
  }
  if (std::abs(matrix.trace() - cplx(1.0, 0.0)) > tol) {
    fail(ErrorKind::InvalidDensity, "trace differs from 1");
  }
  if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > tol) {
    fail(ErrorKind::InvalidDensity, "density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(matrix, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) {
    fail(ErrorKind::InvalidDensity, "density matrix is not positive semidefinite");
  }
}

DensityMatrix reduce(const Vector& state, const SectorBasis& basis, const std::vector<int>& keep) {
  check_subset(keep, basis.n_sites());
  if (static_cast<std::size_t>(state.size()) != basis.size()) {
    fail(ErrorKind::DimensionMismatch, "state size does not match the basis");
  }
  if (std::abs(state.norm() - 1.0) > kNormTol) {
    fail(ErrorKind::NotNormalized, "state norm is " + std::to_string(state.norm()));
  }
  Label keep_mask = 0;
  for (int s : keep) keep_mask |= Label{1} << s;

  // Group amplitudes by the configuration of the traced-out sites. Only
  // configurations present in the sector appear.
  struct Entry {
    std::uint32_t sub;
    double amp;
  };
  std::unordered_map<Label, std::vector<Entry>> groups;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double a = state[static_cast<Index>(k)];
    if (a == 0.0) continue;
    const Label s = basis.state(k);
    std::uint32_t sub = 0;
    for (std::size_t t = 0; t < keep.size(); ++t) sub |= static_cast<std::uint32_t>((s >> keep[t]) & 1U) << t;
    groups[s & ~keep_mask].push_back({sub, a});
  }

  const Index dim = Index{1} << keep.size();
  Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(dim, dim);
  // Deterministic accumulation order regardless of hash layout.
  std::vector<Label> envs;
  envs.reserve(groups.size());
  for (const auto& g : groups) envs.push_back(g.first);
  std::sort(envs.begin(), envs.end());
  for (Label e : envs) {
    const auto& g = groups[e];
    for (const Entry& a : g) {
      for (const Entry& b : g) rho(a.sub, b.sub) += a.amp * b.amp;
    }
  }
  DensityMatrix out;
  out.sites = keep;
  out.matrix = rho.cast<cplx>();
  return out;
}

DensityMatrix reduce(const DensityMatrix& rho, const std::vector<int>& keep) {
  check_subset(keep, std::numeric_limits<int>::max());
  std::vector<int> pos;
  for (int s : keep) {
    auto it = std::find(rho.sites.begin(), rho.sites.end(), s);
    if (it == rho.sites.end()) fail(ErrorKind::BadSubset, "site " + std::to_string(s) + " not in density matrix");
    pos.push_back(static_cast<int>(it - rho.sites.begin()));
  }
  std::uint32_t keep_mask = 0;
  for (int p : pos) keep_mask |= 1U << p;
  const Index full = rho.matrix.rows();
  const Index dim = Index{1} << keep.size();
  auto sub_of = [&](Index s) {
    Index sub = 0;
    for (std::size_t t = 0; t < pos.size(); ++t) sub |= ((s >> pos[t]) & 1) << t;
    return sub;
  };
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  for (Index a = 0; a < full; ++a) {
    for (Index b = 0; b < full; ++b) {
      if ((a & ~Index{keep_mask}) != (b & ~Index{keep_mask})) continue;
      out(sub_of(a), sub_of(b)) += rho.matrix(a, b);
    }
  }
  DensityMatrix r;
  r.sites = keep;
  r.matrix = std::move(out);
  r.source = rho.source;
  return r;
}

DensityMatrix ground_density(const SpectrumResult& spectrum, const std::vector<int>& keep) {
  if (spectrum.eigenvalues.empty()) fail(ErrorKind::BadParams, "empty spectrum");
  if (spectrum.bases.size() != spectrum.eigenvectors.size()) {
    fail(ErrorKind::BadParams, "spectrum carries no basis information");
  }
  const std::size_t g = spectrum.ground_multiplicity();
  DensityMatrix acc;
  for (std::size_t k = 0; k < g; ++k) {
    DensityMatrix r = reduce(spectrum.eigenvectors[k], *spectrum.bases[k], keep);
    if (k == 0) {
      acc = std::move(r);
    } else {
      acc.matrix += r.matrix;
    }
  }
  acc.matrix /= static_cast<double>(g);
  acc.source = {{"seed", spectrum.seed}, {"ground_multiplicity", g}};
  return acc;
}

double concurrence(const DensityMatrix& rho) {
  if (rho.sites.size() != 2 || rho.matrix.rows() != 4) {
    fail(ErrorKind::BadDimension, "concurrence needs a two-site density matrix");
  }
  MatrixXcd sy(2, 2);
  sy << cplx(0, 0), cplx(0, 1), cplx(0, -1), cplx(0, 0);  // rows/cols ordered (down, up)
  MatrixXcd yy(4, 4);
  for (Index a = 0; a < 4; ++a) {
    for (Index b = 0; b < 4; ++b) yy(a, b) = sy(a & 1, b & 1) * sy(a >> 1, b >> 1);
  }
  // With rho = W W^dagger the mu_i are the singular values of W^T yy W; this
  // avoids square roots of round-off-sized eigenvalues.
  MatrixXcd u;
  const Eigen::VectorXd w = clamped_spectrum(0.5 * (rho.matrix + rho.matrix.adjoint()), &u);
  const MatrixXcd factor = u * w.cwiseSqrt().cast<cplx>().asDiagonal();
  const MatrixXcd tau = factor.transpose() * yy * factor;
  Eigen::JacobiSVD<MatrixXcd> svd(tau);
  std::vector<double> mu(svd.singularValues().data(), svd.singularValues().data() + 4);
  std::sort(mu.begin(), mu.end(), std::greater<>());
  return std::max(0.0, mu[0] - mu[1] - mu[2] - mu[3]);
}

double tangle_single(const DensityMatrix& rho) {
  if (rho.sites.size() != 1 || rho.matrix.rows() != 2) {
    fail(ErrorKind::BadDimension, "single-site tangle needs a one-site density matrix");
  }
  const double det = (rho.matrix(0, 0) * rho.matrix(1, 1) - rho.matrix(0, 1) * rho.matrix(1, 0)).real();
  return std::clamp(4.0 * det, 0.0, 1.0);
}

double residual_tangle(const Vector& state, int j) {
  const Index dim = state.size();
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim || n < 1) fail(ErrorKind::DimensionMismatch, "state size is not a power of two");
  if (std::abs(state.norm() - 1.0) > kNormTol) {
    fail(ErrorKind::NotNormalized, "state norm is " + std::to_string(state.norm()));
  }
  if (j < 0 || j >= n) fail(ErrorKind::BadSubset, "site outside the state");
  const SectorBasis basis(n, SectorConstraint::none());
  double r = tangle_single(reduce(state, basis, {j}));
  for (int k = 0; k < n; ++k) {
    if (k == j) continue;
    const double c = concurrence(reduce(state, basis, {j, k}));
    r -= c * c;
  }
  return r;
}

Vector make_z0() {
  Vector z = Vector::Zero(16);
  for (Index s = 0; s < 16; ++s) {
    if (__builtin_popcountll(static_cast<unsigned long long>(s)) == 2) z[s] = 1.0;
  }
  return z / std::sqrt(6.0);
}

double fidelity(const DensityMatrix& rho, const Vector& target) {
  if (target.size() != rho.matrix.rows()) {
    fail(ErrorKind::DimensionMismatch, "target state size does not match the density matrix");
  }
  const Eigen::VectorXcd t = target.cast<cplx>();
  return (t.adjoint() * rho.matrix * t)(0, 0).real();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.matrix.rows() != sigma.matrix.rows()) {
    fail(ErrorKind::DimensionMismatch, "density matrices of different size");
  }
  const MatrixXcd d = rho.matrix - sigma.matrix;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

DensityMatrix pure_density(const Vector& state) {
  const Eigen::VectorXcd v = state.cast<cplx>();
  int n = 0;
  while ((Index{1} << n) < state.size()) ++n;
  DensityMatrix r;
  r.sites.resize(static_cast<std::size_t>(n));
  std::iota(r.sites.begin(), r.sites.end(), 0);
  r.matrix = v * v.adjoint();
  return r;
}

}  // namespace spinsurf
