#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "spinsurf/basis.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/geometry.hpp"
#include "spinsurf/operator.hpp"

using namespace spinsurf;

namespace {

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

std::vector<Bond> random_bonds(int n, std::mt19937_64& rng, bool xy_equal) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.05, 1.0);
  std::vector<Bond> bonds;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < 0.0) continue;
      const double x = u(rng);
      bonds.push_back({i, j, {x, xy_equal ? x : u(rng), u(rng)}, w(rng)});
    }
  }
  if (bonds.empty()) bonds.push_back({0, 1, {1, 1, 1}, 1.0});
  return bonds;
}

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<SpinNetwork> catalog_networks() {
  std::vector<SpinNetwork> out;
  for (const CatalogEntry& e : default_catalog()) {
    for (const Coupling c : {model_coupling("xx"), model_coupling("xxz"), model_coupling("xxx")}) {
      GeometryParams p = e.params;
      p.bulk = p.surface = c;
      out.push_back(make_geometry(e.geometry, p));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("spin-algebra") {
  TEST_CASE("basis enumeration") {
    const SectorBasis full(2, SectorConstraint::none());
    CHECK(full.states() == std::vector<Label>{0, 1, 2, 3});
    const SectorBasis m0(4, SectorConstraint::magnetization(0));
    CHECK(m0.size() == 6);
    for (Label s : m0.states()) CHECK(__builtin_popcountll(s) == 2);
    CHECK_THROWS_AS(SectorBasis(3, SectorConstraint::magnetization(0)), Error);
    try {
      SectorBasis(3, SectorConstraint::magnetization(0));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BadSector);
    }
    CHECK_THROWS_AS(SectorBasis(4, SectorConstraint::magnetization(6)), Error);
    CHECK_THROWS_AS(SectorBasis(4, SectorConstraint::z_parity(0)), Error);
  }

  TEST_CASE("basis invariants: sizes, ordering and index inverse") {
    for (int n = 1; n <= 12; ++n) {
      CHECK(SectorBasis(n, SectorConstraint::none()).size() == (std::size_t{1} << n));
      std::size_t total = 0;
      for (int m = -n; m <= n; m += 2) {
        const SectorBasis b(n, SectorConstraint::magnetization(m));
        CHECK(b.size() == binomial(n, (m + n) / 2));
        total += b.size();
        for (std::size_t k = 0; k < b.size(); ++k) {
          if (k > 0) CHECK(b.state(k) > b.state(k - 1));
          CHECK(magnetization_of(b.state(k), n) == m);
          CHECK(b.index(b.state(k)) == k);
        }
      }
      CHECK(total == (std::size_t{1} << n));
      for (int p : {1, -1}) {
        const SectorBasis b(n, SectorConstraint::z_parity(p));
        CHECK(b.size() == (std::size_t{1} << (n - 1)));
        for (std::size_t k = 0; k < b.size(); ++k) CHECK(b.index(b.state(k)) == k);
      }
    }
    const SectorBasis b(6, SectorConstraint::magnetization(2));
    CHECK(b.find(0b000111) == b.size());
    CHECK_FALSE(b.contains(0b1000000));
  }

  TEST_CASE("XX pair matrix elements") {
    const SectorBasis full(2, SectorConstraint::none());
    const SparseOperator h = assemble_bonds({{0, 1, {1, 1, 0}, 1.0}}, full);
    const Eigen::MatrixXd m = h.to_dense();
    CHECK(m(0b01, 0b10) == 2.0);
    CHECK(m(0b10, 0b01) == 2.0);
    for (int k = 0; k < 4; ++k) CHECK(m(k, k) == 0.0);
    CHECK(m(0b00, 0b11) == 0.0);
    CHECK(h.hermitian());
  }

  TEST_CASE("assembly matches the Kronecker-product oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 2 + trial % 5;
      const auto bonds = random_bonds(n, rng, false);
      const SectorBasis full(n, SectorConstraint::none());
      const Eigen::MatrixXd mine = assemble_bonds(bonds, full).to_dense();
      const Eigen::MatrixXcd ref = oracle::hamiltonian(n, bonds);
      CHECK(ref.imag().cwiseAbs().maxCoeff() < 1e-14);
      CHECK((mine - ref.real()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(assemble_bonds(bonds, full).asymmetry() < 1e-12);
    }
  }

  TEST_CASE("sector operators are blocks of the full operator") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 4 + trial % 4;
      const auto bonds = random_bonds(n, rng, true);
      const SectorBasis full(n, SectorConstraint::none());
      const Eigen::MatrixXd big = assemble_bonds(bonds, full).to_dense();
      for (int m = -n; m <= n; m += 2) {
        const SectorBasis b(n, SectorConstraint::magnetization(m));
        const Eigen::MatrixXd block = assemble_bonds(bonds, b).to_dense();
        for (std::size_t r = 0; r < b.size(); ++r) {
          for (std::size_t c = 0; c < b.size(); ++c) {
            CHECK(block(r, c) == big(b.state(r), b.state(c)));
          }
        }
      }
    }
  }

  TEST_CASE("conservation errors") {
    std::vector<Site> sites = {{0, "B0", SiteKind::Bulk}, {1, "B1", SiteKind::Bulk}};
    const SpinNetwork ising(sites, {{0, 1, {1, 0, 0}, 1.0}});
    const SectorBasis m0(2, SectorConstraint::magnetization(0));
    try {
      assemble_hamiltonian(ising, m0);
      FAIL("expected SectorNotConserved");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SectorNotConserved);
    }
    // Parity sectors are always legal.
    CHECK_NOTHROW(assemble_hamiltonian(ising, SectorBasis(2, SectorConstraint::z_parity(1))));
    CHECK_THROWS_AS(assemble_hamiltonian(ising, SectorBasis(3, SectorConstraint::none())), Error);
  }

  TEST_CASE("assembly is linear in weights and couplings") {
    GeometryParams p;
    p.bulk = p.surface = model_coupling("xxz");
    p.lambda = 0.1;
    const SpinNetwork net = make_geometry("cube2", p);
    const SectorBasis b(net.num_sites(), SectorConstraint::magnetization(0));
    const Eigen::MatrixXd h = assemble_hamiltonian(net, b).to_dense();
    CHECK((assemble_hamiltonian(net.with_scaled_couplings(2.5), b).to_dense() - 2.5 * h).cwiseAbs().maxCoeff() < 1e-12);
    // Surface part is linear in lambda.
    const Eigen::MatrixXd h1 = assemble_hamiltonian(net.with_surface_weight(0.2), b).to_dense();
    const Eigen::MatrixXd h2 = assemble_hamiltonian(net.with_surface_weight(0.4), b).to_dense();
    CHECK(((h2 - h1) - 2.0 * (h1 - h)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("apply and expectation") {
    std::mt19937_64 rng(9);
    const Vector v = random_vector(16, rng);
    CHECK((apply(SparseOperator::identity(16), v) - v).norm() == 0.0);
    CHECK(apply(SparseOperator::zero(16), v).norm() == 0.0);
    CHECK_THROWS_AS(apply(SparseOperator::identity(8), v), Error);

    const SectorBasis one(1, SectorConstraint::none());
    const SparseOperator z = pauli_string({{0, Axis::Z}}, one);
    Vector down = Vector::Zero(2), up = Vector::Zero(2);
    down[0] = 1.0;
    up[1] = 1.0;
    CHECK(expectation(z, up) == 1.0);
    CHECK(expectation(z, down) == -1.0);
    try {
      expectation(z, Vector::Zero(2));
      FAIL("expected ZeroVector");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ZeroVector);
    }

    // Eigenvectors of the dense oracle are eigenvectors under apply().
    const auto bonds = random_bonds(5, rng, false);
    const SectorBasis full(5, SectorConstraint::none());
    const SparseOperator h = assemble_bonds(bonds, full);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(oracle::hamiltonian(5, bonds));
    for (int k = 0; k < 4; ++k) {
      // Real eigenvectors: the oracle matrix is real up to rounding.
      Vector vec = eig.eigenvectors().col(k).real();
      if (vec.norm() < 0.5) vec = eig.eigenvectors().col(k).imag();
      vec.normalize();
      CHECK((apply(h, vec) - eig.eigenvalues()[k] * vec).norm() < 1e-10);
    }
  }

  TEST_CASE("pauli strings") {
    const SectorBasis full(3, SectorConstraint::none());
    const Eigen::MatrixXd yy = pauli_string({{0, Axis::Y}, {2, Axis::Y}}, full).to_dense();
    const Eigen::MatrixXcd ref = oracle::on_site(3, 0, oracle::pauli(1)) * oracle::on_site(3, 2, oracle::pauli(1));
    CHECK((yy - ref.real()).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::MatrixXd xz = pauli_string({{1, Axis::X}, {2, Axis::Z}}, full).to_dense();
    const Eigen::MatrixXcd ref2 = oracle::on_site(3, 1, oracle::pauli(0)) * oracle::on_site(3, 2, oracle::pauli(2));
    CHECK((xz - ref2.real()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(pauli_string({{0, Axis::Y}}, full), Error);
    CHECK_THROWS_AS(pauli_string({{0, Axis::X}, {0, Axis::Z}}, full), Error);
  }

  TEST_CASE("[H_T, S_z] = 0 on every magnetization-conserving catalog network") {
    std::mt19937_64 rng(17);
    for (const SpinNetwork& net : catalog_networks()) {
      if (net.num_sites() > 16) continue;
      CAPTURE(net.meta().dump());
      const SectorBasis full(net.num_sites(), SectorConstraint::none());
      const SparseOperator h = assemble_hamiltonian(net, full);
      const SparseOperator sz = total_magnetization(full);
      const Vector v = random_vector(full.size(), rng).normalized();
      const Vector comm = apply(h, apply(sz, v)) - apply(sz, apply(h, v));
      CHECK(comm.norm() < 1e-10);
    }
  }

  TEST_CASE("[H_B, P_a] = 0 for every catalog bulk") {
    std::mt19937_64 rng(19);
    for (const SpinNetwork& net : catalog_networks()) {
      const BulkView bulk = bulk_view(net);
      const int nb = static_cast<int>(bulk.bulk_ids.size());
      if (nb > 16) continue;
      const SectorBasis full(nb, SectorConstraint::none());
      const SparseOperator h = assemble_bonds(bulk.bonds, full);
      const Vector v = random_vector(full.size(), rng).normalized();
      for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        std::vector<std::pair<int, Axis>> factors;
        for (int s = 0; s < nb; ++s) factors.push_back({s, a});
        const SparseOperator p = pauli_string(factors, full);
        const Vector comm = apply(h, apply(p, v)) - apply(p, apply(h, v));
        CHECK(comm.norm() < 1e-10);
      }
    }
  }

  TEST_CASE("sector union reproduces the full spectrum") {
    for (const char* g : {"square2", "frustrated_square", "frustrated_pentagon", "square4"}) {
      CAPTURE(g);
      GeometryParams p;
      p.bulk = p.surface = model_coupling("xxz");
      p.lambda = 0.3;
      const SpinNetwork net = make_geometry(g, p);
      const int n = net.num_sites();
      std::vector<double> sectors;
      for (int m = -n; m <= n; m += 2) {
        const SectorBasis b(n, SectorConstraint::magnetization(m));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(assemble_hamiltonian(net, b).to_dense(), Eigen::EigenvaluesOnly);
        for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) sectors.push_back(eig.eigenvalues()[k]);
      }
      std::sort(sectors.begin(), sectors.end());
      const auto full = oracle::eigenvalues(oracle::hamiltonian(n, net.bonds()));
      REQUIRE(full.size() == sectors.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < full.size(); ++k) worst = std::max(worst, std::abs(full[k] - sectors[k]));
      CHECK(worst < 1e-9);
    }
  }

  TEST_CASE("matrix market dump") {
    const SectorBasis full(2, SectorConstraint::none());
    std::ostringstream out;
    write_matrix_market(assemble_bonds({{0, 1, {1, 1, 0}, 1.0}}, full), out);
    const std::string text = out.str();
    CHECK(text.rfind("%%MatrixMarket matrix coordinate real general\n4 4 2\n", 0) == 0);
    CHECK(text.find("2 3 2\n") != std::string::npos);
  }
}
