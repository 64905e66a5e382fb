#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracle.hpp"
#include "spinsurf/entanglement.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/geometry.hpp"

using namespace spinsurf;
using oracle::cplx;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Spec;
}

DensityMatrix wrap(const Eigen::MatrixXcd& m, std::vector<int> sites) {
  return DensityMatrix{std::move(sites), m, {}};
}

Vector basis_vector(int n, Label s) {
  Vector v = Vector::Zero(Eigen::Index{1} << n);
  v[static_cast<Eigen::Index>(s)] = 1.0;
  return v;
}

Vector random_real_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(Eigen::Index{1} << n);
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = g(rng);
  return v.normalized();
}

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("entanglement-analysis") {
  TEST_CASE("partial traces of small states") {
    const SectorBasis full2(2, SectorConstraint::none());
    // |01>: site 0 up, site 1 down.
    const DensityMatrix r0 = reduce(basis_vector(2, 0b01), full2, {0});
    CHECK(std::abs(r0.matrix(1, 1) - 1.0) < 1e-15);
    CHECK(std::abs(r0.matrix(0, 0)) < 1e-15);
    const DensityMatrix r1 = reduce(basis_vector(2, 0b01), full2, {1});
    CHECK(std::abs(r1.matrix(0, 0) - 1.0) < 1e-15);

    Vector bell = Vector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const DensityMatrix rb = reduce(bell, full2, {1});
    CHECK(max_abs_diff(rb.matrix, 0.5 * Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);

    const Vector z0 = make_z0();
    const SectorBasis full4(4, SectorConstraint::none());
    for (int s = 0; s < 4; ++s) {
      const DensityMatrix r = reduce(z0, full4, {s});
      CHECK(max_abs_diff(r.matrix, 0.5 * Eigen::MatrixXcd::Identity(2, 2)) < 1e-15);
    }
  }

  TEST_CASE("reduce matches the Kronecker oracle, in any site order") {
    std::mt19937_64 rng(7);
    for (int n = 2; n <= 8; ++n) {
      const Vector psi = random_real_state(n, rng);
      const SectorBasis full(n, SectorConstraint::none());
      std::vector<int> keep = {n - 1, 0};
      if (n > 3) keep.push_back(n / 2);
      const DensityMatrix r = reduce(psi, full, keep);
      CHECK(max_abs_diff(r.matrix, oracle::partial_trace(psi.cast<cplx>(), n, keep)) < 1e-13);
      CHECK_NOTHROW(r.check());
      CHECK(r.sites == keep);
    }
  }

  TEST_CASE("reducing twice equals reducing once") {
    std::mt19937_64 rng(11);
    for (int n = 3; n <= 10; ++n) {
      const Vector psi = random_real_state(n, rng);
      const SectorBasis full(n, SectorConstraint::none());
      const DensityMatrix big = reduce(psi, full, {0, 1, n - 1});
      const DensityMatrix twice = reduce(big, {n - 1, 0});
      const DensityMatrix once = reduce(psi, full, {n - 1, 0});
      CHECK(max_abs_diff(twice.matrix, once.matrix) < 1e-13);
    }
  }

  TEST_CASE("sector-basis states reduce like their full-basis embedding") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const int n = 8;
    const SectorBasis sector(n, SectorConstraint::magnetization(0));
    const SectorBasis full(n, SectorConstraint::none());
    Vector psi(sector.size());
    for (Eigen::Index k = 0; k < psi.size(); ++k) psi[k] = g(rng);
    psi.normalize();
    Vector embedded = Vector::Zero(full.size());
    for (std::size_t k = 0; k < sector.size(); ++k) embedded[sector.state(k)] = psi[k];
    const std::vector<int> keep = {2, 5, 6};
    CHECK(max_abs_diff(reduce(psi, sector, keep).matrix, reduce(embedded, full, keep).matrix) < 1e-14);
  }

  TEST_CASE("reduce rejects bad input") {
    const SectorBasis full(3, SectorConstraint::none());
    const Vector psi = basis_vector(3, 0);
    CHECK(kind_of([&] { reduce(psi, full, {}); }) == ErrorKind::BadSubset);
    CHECK(kind_of([&] { reduce(psi, full, {0, 0}); }) == ErrorKind::BadSubset);
    CHECK(kind_of([&] { reduce(psi, full, {3}); }) == ErrorKind::BadSubset);
    CHECK(kind_of([&] { reduce(Vector(2.0 * psi), full, {0}); }) == ErrorKind::NotNormalized);
    CHECK(kind_of([&] { reduce(Vector::Zero(4), full, {0}); }) == ErrorKind::DimensionMismatch);
  }

  TEST_CASE("concurrence of reference states") {
    Vector singlet = Vector::Zero(4);
    singlet[1] = 1.0 / std::sqrt(2.0);
    singlet[2] = -1.0 / std::sqrt(2.0);
    CHECK(concurrence(pure_density(singlet)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(concurrence(pure_density(basis_vector(2, 0b10))) == doctest::Approx(0.0));
    CHECK(concurrence(wrap(0.25 * Eigen::MatrixXcd::Identity(4, 4), {0, 1})) == doctest::Approx(0.0));

    // Werner state p|singlet><singlet| + (1-p) I/4 has C = max(0, (3p-1)/2).
    for (double p : {0.2, 1.0 / 3.0, 0.5, 0.9}) {
      const Eigen::MatrixXcd w = p * pure_density(singlet).matrix + (1 - p) * 0.25 * Eigen::MatrixXcd::Identity(4, 4);
      CHECK(concurrence(wrap(w, {0, 1})) == doctest::Approx(std::max(0.0, (3 * p - 1) / 2)).epsilon(1e-10));
    }

    const DensityMatrix pair = reduce(make_z0(), SectorBasis(4, SectorConstraint::none()), {0, 1});
    CHECK(concurrence(pair) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(oracle::x_state_concurrence(pair.matrix) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    CHECK(kind_of([] { concurrence(wrap(Eigen::MatrixXcd::Identity(2, 2), {0})); }) == ErrorKind::BadDimension);
  }

  TEST_CASE("concurrence agrees with the pure-state formula and is local-unitary invariant") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXcd psi = oracle::random_state(2, rng);
      const DensityMatrix rho = wrap(psi * psi.adjoint(), {0, 1});
      const double c = concurrence(rho);
      CHECK(c == doctest::Approx(oracle::pure_concurrence(psi)).epsilon(1e-9));
      CHECK(c >= 0.0);
      CHECK(c <= 1.0 + 1e-12);

      const Eigen::MatrixXcd u = oracle::kron(oracle::random_unitary_2(rng), oracle::random_unitary_2(rng));
      CHECK(concurrence(wrap(u * rho.matrix * u.adjoint(), {0, 1})) == doctest::Approx(c).epsilon(1e-9));

      // Mixed states: reduced pairs of three-qubit states.
      const Eigen::VectorXcd chi = oracle::random_state(3, rng);
      const Eigen::MatrixXcd mixed = oracle::partial_trace(chi, 3, {0, 2});
      const double cm = concurrence(wrap(mixed, {0, 2}));
      CHECK(cm >= 0.0);
      CHECK(cm <= 1.0);
      CHECK(concurrence(wrap(u * mixed * u.adjoint(), {0, 2})) == doctest::Approx(cm).epsilon(1e-8));
    }
  }

  TEST_CASE("single-site tangle") {
    CHECK(tangle_single(wrap(0.5 * Eigen::MatrixXcd::Identity(2, 2), {0})) == doctest::Approx(1.0));
    Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(2, 2);
    pure(0, 0) = 1.0;
    CHECK(tangle_single(wrap(pure, {0})) == doctest::Approx(0.0));
    CHECK(kind_of([] { tangle_single(wrap(Eigen::MatrixXcd::Identity(4, 4) / 4.0, {0, 1})); }) == ErrorKind::BadDimension);
  }

  TEST_CASE("residual tangle of reference states") {
    const Vector z0 = make_z0();
    for (int j = 0; j < 4; ++j) CHECK(std::abs(residual_tangle(z0, j) - 2.0 / 3.0) < 1e-12);

    Vector ghz = Vector::Zero(16);
    ghz[0] = ghz[15] = 1.0 / std::sqrt(2.0);
    CHECK(residual_tangle(ghz, 2) == doctest::Approx(1.0).epsilon(1e-12));

    Vector w = Vector::Zero(16);
    for (int s = 0; s < 4; ++s) w[1 << s] = 0.5;
    CHECK(std::abs(residual_tangle(w, 0)) < 1e-12);

    CHECK(std::abs(residual_tangle(basis_vector(4, 0b0110), 1)) < 1e-14);
    CHECK(kind_of([&] { residual_tangle(Vector(2.0 * z0), 0); }) == ErrorKind::NotNormalized);
    CHECK(kind_of([&] { residual_tangle(z0, 4); }) == ErrorKind::BadSubset);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const Vector psi = random_real_state(4, rng);
      const double r = residual_tangle(psi, trial % 4);
      CHECK(r >= -1e-10);
      CHECK(r <= 1.0 + 1e-10);
    }
  }

  TEST_CASE("Z0 structure") {
    const Vector z0 = make_z0();
    CHECK(z0.norm() == doctest::Approx(1.0).epsilon(1e-15));
    const SectorBasis full(4, SectorConstraint::none());
    CHECK(std::abs(expectation(total_magnetization(full), z0)) < 1e-15);
    for (Label s = 0; s < 16; ++s) {
      const double expected = __builtin_popcountll(s) == 2 ? 1.0 / std::sqrt(6.0) : 0.0;
      CHECK(z0[static_cast<Eigen::Index>(s)] == doctest::Approx(expected));
    }
    // Symmetric under exchange of sites 0 and 3.
    for (Label s = 0; s < 16; ++s) {
      const Label swapped = (s & 0b0110) | ((s & 1) << 3) | ((s >> 3) & 1);
      CHECK(z0[static_cast<Eigen::Index>(s)] == z0[static_cast<Eigen::Index>(swapped)]);
    }
  }

  TEST_CASE("fidelity and trace distance") {
    const Vector z0 = make_z0();
    const DensityMatrix rz = pure_density(z0);
    CHECK(fidelity(rz, z0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fidelity(pure_density(basis_vector(4, 0b1111)), z0) == doctest::Approx(0.0));
    const DensityMatrix mixed = wrap(Eigen::MatrixXcd::Identity(16, 16) / 16.0, {0, 1, 2, 3});
    CHECK(fidelity(mixed, z0) == doctest::Approx(1.0 / 16.0));
    CHECK(kind_of([&] { fidelity(rz, Vector::Zero(4)); }) == ErrorKind::DimensionMismatch);

    CHECK(trace_distance(rz, rz) == doctest::Approx(0.0));
    CHECK(trace_distance(rz, pure_density(basis_vector(4, 0))) == doctest::Approx(1.0));
    CHECK(trace_distance(rz, mixed) == doctest::Approx(15.0 / 16.0));
    CHECK(kind_of([&] { trace_distance(rz, pure_density(basis_vector(2, 0))); }) == ErrorKind::DimensionMismatch);
  }

  TEST_CASE("density matrix validation") {
    CHECK_NOTHROW(wrap(Eigen::MatrixXcd::Identity(2, 2) / 2.0, {0}).check());
    CHECK(kind_of([] { wrap(Eigen::MatrixXcd::Identity(2, 2), {0}).check(); }) == ErrorKind::InvalidDensity);
    Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK(kind_of([&] { wrap(neg, {0}).check(); }) == ErrorKind::InvalidDensity);
    Eigen::MatrixXcd skew = Eigen::MatrixXcd::Identity(2, 2) / 2.0;
    skew(0, 1) = 0.1;
    CHECK(kind_of([&] { wrap(skew, {0}).check(); }) == ErrorKind::InvalidDensity);
  }

  TEST_CASE("ground density of a degenerate manifold is the equal mixture") {
    // The ferro XXX pair has a threefold triplet ground manifold.
    auto full = std::make_shared<const SectorBasis>(2, SectorConstraint::none());
    SpectrumResult lowest = dense_spectrum(assemble_bonds({{0, 1, {-1, -1, -1}, 1.0}}, *full));
    CHECK(lowest.ground_multiplicity() == 3);
    CHECK(kind_of([&] { ground_density(lowest, {0}); }) == ErrorKind::BadParams);
    lowest.bases.assign(lowest.eigenvectors.size(), full);
    const DensityMatrix rho = ground_density(lowest, {0, 1});
    Eigen::MatrixXcd triplet = Eigen::MatrixXcd::Identity(4, 4);
    Vector singlet = Vector::Zero(4);
    singlet[1] = 1.0 / std::sqrt(2.0);
    singlet[2] = -1.0 / std::sqrt(2.0);
    triplet -= pure_density(singlet).matrix;
    CHECK(max_abs_diff(rho.matrix, triplet / 3.0) < 1e-12);
    CHECK(concurrence(rho) == doctest::Approx(0.0));
  }
}
