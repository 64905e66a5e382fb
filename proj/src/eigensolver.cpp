#include "spinsurf/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spinsurf/errors.hpp"

namespace spinsurf {

std::size_t SpectrumResult::ground_multiplicity() const {
  std::size_t k = 0;
  while (k < eigenvalues.size() && eigenvalues[k] - eigenvalues.front() < degeneracy_threshold) ++k;
  return std::max<std::size_t>(k, 1);
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

void finish_gap(SpectrumResult& r, double degeneracy_rel) {
  if (r.eigenvalues.empty()) return;
  r.degeneracy_threshold = degeneracy_rel * std::max(1.0, std::abs(r.eigenvalues.front()));
  if (r.eigenvalues.size() >= 2) {
    r.gap = std::max(0.0, r.eigenvalues[1] - r.eigenvalues[0]);
    r.ground_degenerate = r.gap < r.degeneracy_threshold;
  } else {
    r.gap = 0.0;
    r.ground_degenerate = false;
  }
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  Vector v(static_cast<Index>(n));
  for (Index k = 0; k < v.size(); ++k) {
    // Uniform in [-1, 1) from the top 53 bits; independent of the library's distributions.
    v[k] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  }
  return v;
}

/// Removes components along the first `cols` columns of V and along `locked`,
/// twice. Returns the accumulated projection coefficients on V.
Vector orthogonalize(Vector& w, const MatrixXd& V, Index cols, const MatrixXd& locked) {
  Vector h = Vector::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    if (locked.cols() > 0) w.noalias() -= locked * (locked.transpose() * w);
    if (cols > 0) {
      const Vector c = V.leftCols(cols).transpose() * w;
      w.noalias() -= V.leftCols(cols) * c;
      h += c;
    }
  }
  return h;
}

struct RunResult {
  std::vector<double> values;
  MatrixXd vectors;
  std::vector<double> residuals;
  double norm_estimate = 0.0;
  std::size_t matvecs = 0;
};

/// Thick-restart Lanczos with full reorthogonalization, working in the
/// orthogonal complement of `locked`.
RunResult thick_restart_lanczos(const SparseOperator& op, int nev, double tol,
                                std::mt19937_64& rng, const MatrixXd& locked,
                                const SolverOptions& opts) {
  const Index n = static_cast<Index>(op.dimension());
  const Index avail = n - locked.cols();
  RunResult out;
  if (avail <= 0 || nev <= 0) return out;
  nev = static_cast<int>(std::min<Index>(nev, avail));
  const Index m = std::min<Index>(std::max<Index>(opts.krylov_dim, 2 * nev + 4), avail);

  MatrixXd V(n, m);
  MatrixXd T = MatrixXd::Zero(m, m);
  Vector w(n);
  double norm_est = 0.0;

  auto fresh_direction = [&](Index cols, Vector& v) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      v = random_vector(static_cast<std::size_t>(n), rng);
      const double before = v.norm();
      orthogonalize(v, V, cols, locked);
      const double after = v.norm();
      if (after > 1e-8 * before) {
        v /= after;
        return true;
      }
    }
    return false;
  };

  {
    Vector v0;
    if (!fresh_direction(0, v0)) return out;
    V.col(0) = v0;
  }

  Index start = 0;  // first column whose H-image is still to be computed
  double beta_last = 0.0;
  Vector residual(n);

  for (int restart = 0;; ++restart) {
    Index m_eff = m;
    for (Index col = start; col < m; ++col) {
      op.apply({V.col(col).data(), static_cast<std::size_t>(n)},
               {w.data(), static_cast<std::size_t>(n)});
      ++out.matvecs;
      const Vector h = orthogonalize(w, V, col + 1, locked);
      for (Index i = 0; i <= col; ++i) {
        T(i, col) = h[i];
        T(col, i) = h[i];
      }
      const double beta = w.norm();
      norm_est = std::max(norm_est, std::abs(h[col]));
      if (col + 1 < m) {
        if (beta > 1e-12 * std::max(norm_est, 1e-300)) {
          V.col(col + 1) = w / beta;
          T(col + 1, col) = beta;
          T(col, col + 1) = beta;
        } else {
          // Invariant subspace: continue in a new random direction.
          Vector v;
          if (!fresh_direction(col + 1, v)) {
            m_eff = col + 1;
            beta_last = 0.0;
            break;
          }
          V.col(col + 1) = v;
        }
      } else {
        residual = w;
        beta_last = beta;
      }
    }

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(T.topLeftCorner(m_eff, m_eff));
    const Vector& theta = eig.eigenvalues();
    const MatrixXd& S = eig.eigenvectors();
    norm_est = std::max({norm_est, std::abs(theta[0]), std::abs(theta[m_eff - 1])});

    std::vector<double> res(static_cast<std::size_t>(nev));
    bool converged = true;
    for (int i = 0; i < nev; ++i) {
      res[i] = beta_last * std::abs(S(m_eff - 1, i));
      if (res[i] > tol * norm_est) converged = false;
    }

    if (converged || restart >= opts.max_restarts) {
      if (!converged) {
        std::ostringstream msg;
        msg << "Lanczos did not converge after " << restart << " restarts; residuals:";
        for (double r : res) msg << ' ' << r;
        fail(ErrorKind::NoConvergence, msg.str());
      }
      out.vectors = V.leftCols(m_eff) * S.leftCols(nev);
      for (int i = 0; i < nev; ++i) out.values.push_back(theta[i]);
      out.residuals = res;
      out.norm_estimate = norm_est;
      return out;
    }

    // Keep the lowest Ritz vectors and continue from the residual direction.
    const Index keep = std::min<Index>(m_eff - 1, nev + (m_eff - nev) / 2);
    const MatrixXd ritz = V.leftCols(m_eff) * S.leftCols(keep);
    V.leftCols(keep) = ritz;
    T.setZero();
    for (Index i = 0; i < keep; ++i) T(i, i) = theta[i];
    if (beta_last > 1e-12 * norm_est) {
      V.col(keep) = residual / beta_last;
      for (Index i = 0; i < keep; ++i) {
        T(keep, i) = beta_last * S(m_eff - 1, i);
        T(i, keep) = T(keep, i);
      }
    } else {
      Vector v;
      if (!fresh_direction(keep, v)) {
        fail(ErrorKind::NoConvergence, "Krylov space exhausted before convergence");
      }
      V.col(keep) = v;
    }
    start = keep;
  }
}

}  // namespace

SpectrumResult dense_spectrum(const SparseOperator& op, std::size_t cap) {
  if (op.dimension() > cap) {
    fail(ErrorKind::TooLarge, "dense diagonalization of dimension " +
                                  std::to_string(op.dimension()) + " exceeds cap " +
                                  std::to_string(cap));
  }
  SpectrumResult r;
  if (op.dimension() == 0) return r;
  const MatrixXd H = op.to_dense();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (H + H.transpose()));
  const MatrixXd residual = H * eig.eigenvectors() - eig.eigenvectors() * eig.eigenvalues().asDiagonal();
  for (Index k = 0; k < H.rows(); ++k) {
    r.eigenvalues.push_back(eig.eigenvalues()[k]);
    r.eigenvectors.push_back(eig.eigenvectors().col(k));
    r.residual_norms.push_back(residual.col(k).norm());
  }
  r.norm_estimate = std::max(std::abs(r.eigenvalues.front()), std::abs(r.eigenvalues.back()));
  finish_gap(r, SolverOptions{}.degeneracy_rel);
  return r;
}

SpectrumResult lanczos_spectrum(const SparseOperator& op, int k, double tol, std::uint64_t seed,
                                const SolverOptions& opts) {
  if (k < 2) fail(ErrorKind::BadParams, "lanczos_spectrum needs k >= 2");
  if (!(tol > 0.0)) fail(ErrorKind::BadParams, "lanczos_spectrum needs tol > 0");
  const std::size_t n = op.dimension();
  k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), n));

  std::mt19937_64 rng(seed);
  SpectrumResult r;
  r.seed = seed;
  if (k == 0) return r;

  RunResult run = thick_restart_lanczos(op, k, tol, rng, MatrixXd(static_cast<Index>(n), 0), opts);
  r.matvecs += run.matvecs;
  double norm_est = run.norm_estimate;
  std::vector<double> values = run.values;
  MatrixXd vectors = run.vectors;

  // A single Krylov sequence sees one vector per degenerate eigenspace, so look
  // for states below the k-th value in the complement of what was found.
  if (opts.deflation_check) {
    while (static_cast<std::size_t>(vectors.cols()) < n) {
      RunResult extra = thick_restart_lanczos(op, 1, tol, rng, vectors, opts);
      r.matvecs += extra.matvecs;
      norm_est = std::max(norm_est, extra.norm_estimate);
      if (extra.values.empty()) break;
      const double slack = 10.0 * tol * norm_est;
      if (extra.values[0] >= values.back() - slack) break;
      values.push_back(extra.values[0]);
      MatrixXd grown(vectors.rows(), vectors.cols() + 1);
      grown << vectors, extra.vectors.col(0);
      vectors = std::move(grown);
    }
  }

  // Rayleigh quotients of every candidate first, so the final order is by the
  // reported values.
  struct Pair {
    double value;
    double residual;
    Vector vector;
  };
  std::vector<Pair> pairs;
  Vector hv(static_cast<Index>(n));
  for (Index c = 0; c < vectors.cols(); ++c) {
    Vector v = vectors.col(c);
    v.normalize();
    op.apply({v.data(), n}, {hv.data(), n});
    ++r.matvecs;
    const double e = v.dot(hv);
    pairs.push_back({e, (hv - e * v).norm(), std::move(v)});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.value < b.value; });
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(k) && idx < pairs.size(); ++idx) {
    r.eigenvalues.push_back(pairs[idx].value);
    r.residual_norms.push_back(pairs[idx].residual);
    r.eigenvectors.push_back(std::move(pairs[idx].vector));
  }
  r.norm_estimate = norm_est;
  finish_gap(r, opts.degeneracy_rel);
  return r;
}

namespace {

struct Level {
  double energy;
  Vector vector;
  double residual;
  std::shared_ptr<const SectorBasis> basis;
};

std::vector<Level> solve_sector(const std::vector<Bond>& bonds,
                                std::shared_ptr<const SectorBasis> basis, int k,
                                const SolverOptions& opts, SpectrumResult& acc) {
  const SparseOperator op = assemble_bonds(bonds, *basis);
  SpectrumResult s;
  if (op.dimension() <= opts.dense_threshold) {
    s = dense_spectrum(op, opts.dense_cap);
  } else {
    s = lanczos_spectrum(op, std::max(k, 2), opts.tol, opts.seed, opts);
  }
  acc.matvecs += s.matvecs;
  acc.norm_estimate = std::max(acc.norm_estimate, s.norm_estimate);
  acc.sectors.push_back(basis->constraint().describe());
  std::vector<Level> out;
  // Keep every dense level degenerate with the k-th so multiplicities are complete.
  for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
    if (i >= static_cast<std::size_t>(k) &&
        s.eigenvalues[i] - s.eigenvalues[k - 1] >
            opts.degeneracy_rel * std::max(1.0, std::abs(s.eigenvalues[0]))) {
      break;
    }
    out.push_back({s.eigenvalues[i], s.eigenvectors[i], s.residual_norms[i], basis});
  }
  return out;
}

/// Image of a sector-M state under the global spin flip prod_i sigma^x_i, which
/// commutes with every XYZ bond Hamiltonian and maps M to -M.
Level mirror(const Level& lvl, std::shared_ptr<const SectorBasis> target) {
  const SectorBasis& src = *lvl.basis;
  const Label mask = (Label{1} << src.n_sites()) - 1;
  Vector v(lvl.vector.size());
  for (std::size_t k = 0; k < src.size(); ++k) {
    v[static_cast<Index>(target->index(~src.state(k) & mask))] = lvl.vector[static_cast<Index>(k)];
  }
  return {lvl.energy, std::move(v), lvl.residual, std::move(target)};
}

}  // namespace

SpectrumResult lowest_levels(int n_sites, const std::vector<Bond>& bonds,
                             const SolverOptions& opts) {
  if (n_sites >= 63 || (std::size_t{1} << n_sites) > opts.max_dim) {
    fail(ErrorKind::ResourceCap, "Hilbert space of " + std::to_string(n_sites) +
                                     " spins exceeds the dimension cap " +
                                     std::to_string(opts.max_dim));
  }
  std::vector<Coupling> couplings;
  for (const Bond& b : bonds) couplings.push_back(b.coupling);
  const SymmetryClass cls = classify_couplings(couplings);

  SpectrumResult acc;
  acc.seed = opts.seed;
  std::vector<Level> levels;
  auto by_energy = [](const Level& a, const Level& b) { return a.energy < b.energy; };

  if (cls.conserves_magnetization()) {
    const int m0 = n_sites % 2;
    auto add_sector = [&](int m) {
      auto basis = std::make_shared<const SectorBasis>(n_sites, SectorConstraint::magnetization(m));
      std::vector<Level> found = solve_sector(bonds, basis, 2, opts, acc);
      double lowest = found.empty() ? INFINITY : found.front().energy;
      if (m != 0) {
        auto neg = std::make_shared<const SectorBasis>(n_sites, SectorConstraint::magnetization(-m));
        acc.sectors.push_back(neg->constraint().describe() + "(mirror)");
        const std::size_t count = found.size();
        for (std::size_t i = 0; i < count; ++i) found.push_back(mirror(found[i], neg));
      }
      for (Level& l : found) levels.push_back(std::move(l));
      std::stable_sort(levels.begin(), levels.end(), by_energy);
      return lowest;
    };
    add_sector(m0);
    for (int m = m0 + 2; m <= n_sites; m += 2) {
      const double second = levels.size() >= 2 ? levels[1].energy : INFINITY;
      const double lowest = add_sector(m);
      if (lowest >= second) break;
    }
  } else {
    auto basis = std::make_shared<const SectorBasis>(n_sites, SectorConstraint::none());
    levels = solve_sector(bonds, basis, 2, opts, acc);
  }

  // Keep E0, E1 and anything degenerate with E0.
  const double thr = opts.degeneracy_rel * std::max(1.0, std::abs(levels.front().energy));
  std::size_t keep = std::min<std::size_t>(2, levels.size());
  while (keep < levels.size() && levels[keep].energy - levels.front().energy < thr) ++keep;
  for (std::size_t i = 0; i < keep; ++i) {
    acc.eigenvalues.push_back(levels[i].energy);
    acc.eigenvectors.push_back(std::move(levels[i].vector));
    acc.residual_norms.push_back(levels[i].residual);
    acc.bases.push_back(levels[i].basis);
  }
  finish_gap(acc, opts.degeneracy_rel);
  return acc;
}

SpectrumResult bulk_levels(const SpinNetwork& net, const SolverOptions& opts) {
  const BulkView bulk = bulk_view(net);
  return lowest_levels(static_cast<int>(bulk.bulk_ids.size()), bulk.bonds, opts);
}

SpectrumResult ground_and_gap(const SpinNetwork& net, const SolverOptions& opts) {
  const SpectrumResult bulk = bulk_levels(net, opts);
  if (bulk.ground_degenerate) {
    std::ostringstream msg;
    msg << "bulk ground state is degenerate (E1-E0 = " << bulk.gap << ")";
    fail(ErrorKind::DegenerateBulk, msg.str());
  }
  return lowest_levels(net.num_sites(), net.bonds(), opts);
}

}  // namespace spinsurf
