#include "spinsurf/effective.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Eigenvalues>

#include "spinsurf/errors.hpp"
#include "spinsurf/operator.hpp"

namespace spinsurf {

using Eigen::Index;
using Eigen::MatrixXd;

namespace {

constexpr std::size_t kAutoDenseDim = std::size_t{1} << 10;

/// Real vector w with sigma^a_site |psi> = c w, where c = i for a = y and 1 otherwise.
Vector pauli_image(const Vector& psi, const SectorBasis& full, int site, int axis) {
  Vector w = Vector::Zero(psi.size());
  const Label bit = Label{1} << site;
  for (std::size_t k = 0; k < full.size(); ++k) {
    const double a = psi[static_cast<Index>(k)];
    if (a == 0.0) continue;
    const Label s = full.state(k);
    const double sign = (s & bit) ? 1.0 : -1.0;
    switch (axis) {
      case 0: w[static_cast<Index>(s ^ bit)] += a; break;
      case 1: w[static_cast<Index>(s ^ bit)] += sign * a; break;
      default: w[static_cast<Index>(s)] += sign * a; break;
    }
  }
  return w;
}

/// Conjugate gradient for (H - e0) x = b on the complement of phi0.
Vector solve_resolvent(const SparseOperator& h, double e0, const Vector& phi0, Vector b) {
  const std::size_t n = h.dimension();
  b -= phi0 * phi0.dot(b);
  const double bnorm = b.norm();
  Vector x = Vector::Zero(b.size());
  if (bnorm == 0.0) return x;
  Vector r = b;
  Vector p = r;
  Vector ap(b.size());
  double rr = r.squaredNorm();
  const double target = 1e-12 * bnorm;
  const std::size_t cap = 10 * n;
  for (std::size_t it = 0; it < cap; ++it) {
    h.apply({p.data(), n}, {ap.data(), n});
    ap -= e0 * p;
    ap -= phi0 * phi0.dot(ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      fail(ErrorKind::ResolventSingular, "resolvent operator is not positive on the complement");
    }
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= target) {
      x -= phi0 * phi0.dot(x);
      return x;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  fail(ErrorKind::ResolventSingular,
       "conjugate gradient stalled at relative residual " + std::to_string(std::sqrt(rr) / bnorm));
}

double component(const Coupling& c, int axis) { return axis == 0 ? c.x : axis == 1 ? c.y : c.z; }

}  // namespace

double EffectiveHamiltonian::self_energy() const {
  double e = 0.0;
  for (const MatrixXd& m : lambda) e += 0.5 * m.trace();
  return e;
}

EffectiveHamiltonian effective_couplings(const SpinNetwork& net, EffectiveMethod method,
                                         const SolverOptions& opts) {
  const BulkView bulk = bulk_view(net);
  const int nb = static_cast<int>(bulk.bulk_ids.size());
  if ((std::size_t{1} << nb) > opts.max_dim) {
    fail(ErrorKind::ResourceCap, "bulk of " + std::to_string(nb) + " spins exceeds the dimension cap");
  }

  EffectiveHamiltonian eff;
  for (int s : net.surface_sites()) {
    const Bond& link = net.bonds()[net.surface_link(s)];
    eff.surface_sites.push_back(s);
    eff.attachments.push_back(net.attachment(s));
    eff.lambdas.push_back(link.weight);
    eff.k_couplings.push_back(link.coupling);
  }
  const Index ns = static_cast<Index>(eff.surface_sites.size());

  const SpectrumResult levels = lowest_levels(nb, bulk.bonds, opts);
  if (levels.ground_degenerate) {
    fail(ErrorKind::DegenerateBulk, "bulk ground state is degenerate (E1-E0 = " +
                                        std::to_string(levels.gap) + ")");
  }
  eff.bulk_gap = levels.gap;

  const SectorBasis full(nb, SectorConstraint::none());
  const SparseOperator h = assemble_bonds(bulk.bonds, full);
  const std::size_t dim = full.size();

  if (method == EffectiveMethod::Auto) {
    method = dim <= kAutoDenseDim ? EffectiveMethod::SumOverStates : EffectiveMethod::Resolvent;
  }
  eff.method = method;

  Vector phi0 = Vector::Zero(static_cast<Index>(dim));
  double e0 = 0.0;
  std::vector<double> spectrum;
  MatrixXd vectors;
  if (method == EffectiveMethod::SumOverStates) {
    if (dim > opts.dense_cap) {
      fail(ErrorKind::TooLarge, "sum over states needs the full bulk spectrum; dimension " +
                                    std::to_string(dim) + " exceeds the dense cap");
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h.to_dense());
    vectors = eig.eigenvectors();
    spectrum.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + dim);
    phi0 = vectors.col(0);
    e0 = spectrum[0];
  } else {
    const SectorBasis& sb = *levels.bases.front();
    for (std::size_t k = 0; k < sb.size(); ++k) {
      phi0[static_cast<Index>(sb.state(k))] = levels.eigenvectors.front()[static_cast<Index>(k)];
    }
    phi0.normalize();
    e0 = expectation(h, phi0);
  }
  eff.bulk_energy = e0;

  double max_lambda = 0.0, max_k = 0.0;
  for (Index j = 0; j < ns; ++j) {
    max_lambda = std::max(max_lambda, eff.lambdas[j]);
    max_k = std::max(max_k, eff.k_couplings[j].max_abs());
  }
  eff.validity_ratio = max_lambda * max_k > 0.0 ? eff.bulk_gap / (max_lambda * max_k) : INFINITY;

  for (int axis = 0; axis < 3; ++axis) {
    MatrixXd& lam = eff.lambda[axis];
    lam = MatrixXd::Zero(ns, ns);
    std::vector<Vector> w(static_cast<std::size_t>(ns));
    for (Index j = 0; j < ns; ++j) {
      w[j] = pauli_image(phi0, full, bulk.original_to_bulk[eff.attachments[j]], axis);
    }
    MatrixXd sums = MatrixXd::Zero(ns, ns);
    if (method == EffectiveMethod::SumOverStates) {
      MatrixXd c(static_cast<Index>(dim), ns);
      for (Index j = 0; j < ns; ++j) c.col(j) = vectors.transpose() * w[j];
      for (Index l = 1; l < static_cast<Index>(dim); ++l) {
        const double de = spectrum[l] - e0;
        sums += (c.row(l).transpose() * c.row(l)) / de;
      }
    } else {
      for (Index k = 0; k < ns; ++k) {
        if (component(eff.k_couplings[k], axis) == 0.0) continue;
        const Vector x = solve_resolvent(h, e0, phi0, w[k]);
        for (Index j = 0; j < ns; ++j) sums(j, k) = w[j].dot(x);
      }
      sums = 0.5 * (sums + sums.transpose()).eval();
    }
    for (Index j = 0; j < ns; ++j) {
      for (Index k = 0; k < ns; ++k) {
        lam(j, k) = -2.0 * eff.lambdas[j] * eff.lambdas[k] * component(eff.k_couplings[j], axis) *
                    component(eff.k_couplings[k], axis) * sums(j, k);
      }
    }
  }

  std::vector<Coupling> pairs;
  for (Index j = 0; j < ns; ++j) {
    for (Index k = j + 1; k < ns; ++k) {
      pairs.push_back({eff.lambda[0](j, k), eff.lambda[1](j, k), eff.lambda[2](j, k)});
    }
  }
  eff.symmetry = classify_couplings(pairs);
  return eff;
}

EffectiveGround effective_ground(const EffectiveHamiltonian& eff) {
  const int ns = eff.size();
  if (ns < 1 || ns > kMaxReducedSites) {
    fail(ErrorKind::BadSubset, "effective model needs 1.." + std::to_string(kMaxReducedSites) +
                                   " surface spins");
  }
  std::vector<Bond> bonds;
  for (int j = 0; j < ns; ++j) {
    for (int k = j + 1; k < ns; ++k) {
      const Coupling c{eff.lambda[0](j, k), eff.lambda[1](j, k), eff.lambda[2](j, k)};
      if (c.max_abs() == 0.0) continue;
      bonds.push_back({j, k, c, 1.0});
    }
  }
  auto basis = std::make_shared<const SectorBasis>(ns, SectorConstraint::none());
  const SparseOperator h = assemble_bonds(bonds, *basis);
  EffectiveGround out;
  out.spectrum = dense_spectrum(h);
  const double shift = eff.self_energy();
  for (double& e : out.spectrum.eigenvalues) e += shift;
  out.spectrum.bases.assign(out.spectrum.eigenvectors.size(), basis);
  out.ground = out.spectrum.eigenvectors.front();

  std::vector<int> all(static_cast<std::size_t>(ns));
  for (int j = 0; j < ns; ++j) all[j] = j;
  out.density = ground_density(out.spectrum, all);
  out.density.sites = eff.surface_sites;
  return out;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const ValidationRow& r : rows) {
    j["rows"].push_back({{"lambda", r.lambda},
                         {"trace_distance", r.trace_distance},
                         {"fidelity", r.fidelity},
                         {"exact_gap", r.exact_gap},
                         {"effective_gap", r.effective_gap}});
  }
  j["monotone_tail"] = monotone_tail;
  j["converged"] = converged;
  if (error) j["error"] = {{"kind", error_kind}, {"message", *error}};
  return j;
}

ValidationReport validate_effective(const SpinNetwork& net, const std::vector<double>& lambda_grid,
                                    const SolverOptions& opts) {
  ValidationReport report;
  if (lambda_grid.empty()) return report;

  EffectiveHamiltonian eff;
  try {
    eff = effective_couplings(net.with_surface_weight(1.0), EffectiveMethod::Auto, opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateBulk) throw;
    report.error = e.what();
    report.error_kind = std::string(to_string(e.kind()));
    report.converged = false;
    return report;
  }
  // With uniform weights every Lambda scales as lambda^2, so the effective
  // ground state does not depend on lambda.
  const EffectiveGround eg = effective_ground(eff);
  const bool unique = eg.spectrum.ground_multiplicity() == 1;

  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (double lam : grid) {
    const SpectrumResult exact = ground_and_gap(net.with_surface_weight(lam), opts);
    DensityMatrix rho = ground_density(exact, eff.surface_sites);
    ValidationRow row;
    row.lambda = lam;
    row.trace_distance = trace_distance(rho, eg.density);
    row.fidelity = unique ? fidelity(rho, eg.ground)
                          : (rho.matrix * eg.density.matrix).trace().real();
    row.exact_gap = exact.gap;
    row.effective_gap = eg.spectrum.gap * lam * lam;
    report.rows.push_back(row);
  }
  // Tail: the smaller half of the grid, at least two points.
  const std::size_t n = report.rows.size();
  const std::size_t first = n >= 2 ? std::min(n / 2, n - 2) : 0;
  for (std::size_t i = first + 1; i < n; ++i) {
    if (report.rows[i].trace_distance > report.rows[i - 1].trace_distance + 1e-9) {
      report.monotone_tail = false;
    }
  }
  report.converged = report.rows.back().trace_distance < 0.05;
  return report;
}

nlohmann::json to_json(const EffectiveHamiltonian& eff) {
  auto matrix = [](const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json k = nlohmann::json::array();
  for (const Coupling& c : eff.k_couplings) k.push_back({c.x, c.y, c.z});
  return {{"surface_sites", eff.surface_sites},
          {"attachments", eff.attachments},
          {"lambdas", eff.lambdas},
          {"K", k},
          {"Lambda", {{"x", matrix(eff.lambda[0])}, {"y", matrix(eff.lambda[1])}, {"z", matrix(eff.lambda[2])}}},
          {"self_energy", eff.self_energy()},
          {"symmetry", std::string(to_string(eff.symmetry.tag))},
          {"bulk_energy", eff.bulk_energy},
          {"bulk_gap", eff.bulk_gap},
          {"validity_ratio", eff.validity_ratio},
          {"method", eff.method == EffectiveMethod::SumOverStates ? "sum-over-states" : "resolvent"}};
}

}  // namespace spinsurf
