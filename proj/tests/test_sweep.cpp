#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinsurf/errors.hpp"
#include "spinsurf/sweep.hpp"

using namespace spinsurf;

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

SweepSpec square_spec() {
  SweepSpec s;
  s.geometry = "square2";
  s.parameter = "lambda";
  s.grid = {0.3, 0.1, 0.05};
  s.observables = {"concurrence", "gap", "energy", "trace_distance", "residual_tangle:S1"};
  return s;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream out;
  write_csv(r, out);
  return out.str();
}

}  // namespace

TEST_SUITE("sweep-cli") {
  TEST_CASE("spec validation") {
    SweepSpec s = square_spec();
    CHECK_NOTHROW(s.validate());
    auto broken = [&](auto edit) {
      SweepSpec t = square_spec();
      edit(t);
      return kind_of([&] { t.validate(); });
    };
    CHECK(broken([](SweepSpec& t) { t.grid.clear(); }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.grid = {0.1, 0.2, 0.15}; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.grid = {0.1, 0.1}; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.parameter = "temperature"; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.geometry = "torus"; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.observables = {"entropy"}; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.observables = {"concurrence:S1"}; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.observables = {"concurrence:S1,S9"}; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.observables = {"fidelity:w"}; }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) { t.observables.clear(); }) == ErrorKind::Spec);
    CHECK(broken([](SweepSpec& t) {
      t.network = make_geometry("square2");
      t.parameter = "kz";
      t.grid = {0.1, 0.2};
    }) == ErrorKind::Spec);
  }

  TEST_CASE("rows follow grid order and agree with direct computation") {
    const SweepResult r = run_sweep(square_spec());
    REQUIRE(r.table.grid == std::vector<double>{0.3, 0.1, 0.05});
    const auto gaps = r.table.series("gap");
    for (std::size_t k = 0; k < gaps.size(); ++k) {
      GeometryParams p;
      p.lambda = r.table.grid[k];
      const SpectrumResult direct = ground_and_gap(make_geometry("square2", p));
      CHECK(gaps[k] == direct.gap);
      CHECK(r.table.series("energy")[k] == direct.ground_energy());
      CHECK(r.table.diagnostics[k].status == "ok");
      CHECK(r.table.diagnostics[k].n_sites == 6);
    }
    const auto c = r.table.series("concurrence");
    CHECK(c[0] < c[1]);
    CHECK(c[1] < c[2]);
    // The effective ground state of two surface spins is a pure pair state.
    for (double v : r.table.series("residual_tangle:S1")) CHECK(std::abs(v) < 1e-10);
    CHECK(kind_of([&] { r.table.column("entropy"); }) == ErrorKind::Spec);
  }

  TEST_CASE("thread count does not change the output") {
    SweepSpec a = square_spec();
    a.grid = {0.4, 0.3, 0.2, 0.1, 0.05};
    SweepSpec b = a;
    b.threads = 3;
    const SweepResult ra = run_sweep(a);
    const SweepResult rb = run_sweep(b);
    CHECK(csv_of(ra) == csv_of(rb));
    CHECK(csv_of(ra) == csv_of(run_sweep(a)));
    CHECK(ra.manifest.hash_hex() == run_sweep(a).manifest.hash_hex());
  }

  TEST_CASE("csv layout") {
    const std::string csv = csv_of(run_sweep(square_spec()));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# {", 0) == 0);
    const auto meta = nlohmann::json::parse(line.substr(2));
    CHECK(meta.contains("manifest_hash"));
    CHECK(meta["parameter"] == "lambda");
    std::getline(in, line);
    CHECK(line == "lambda,concurrence,gap,energy,trace_distance,residual_tangle:S1,n_sites,ground_degenerate,status");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
  }

  TEST_CASE("failures are recorded per point") {
    SweepSpec s;
    s.geometry = "ring";
    s.parameter = "size";
    s.grid = {4, 6, 8};
    s.observables = {"gap"};
    s.solver.max_dim = 1 << 8;
    const SweepResult r = run_sweep(s);
    CHECK(r.table.diagnostics[0].status == "ok");
    CHECK(r.table.diagnostics[1].status == "ok");
    CHECK(r.table.diagnostics[2].status == "ResourceCap");
    CHECK(std::isnan(r.table.values[2][0]));
    CHECK(csv_of(r).find("nan") != std::string::npos);

    SweepSpec d;
    d.geometry = "square2";
    d.params.bulk = d.params.surface = model_coupling("xxx");
    d.params.ferro = true;
    d.grid = {0.1};
    d.observables = {"gap"};
    CHECK(run_sweep(d).table.diagnostics[0].status == "DegenerateBulk");
  }

  TEST_CASE("parameter mapping") {
    SweepSpec s;
    s.geometry = "square2";
    s.params.bulk = s.params.surface = model_coupling("xxz");
    s.parameter = "kz";
    s.kz_sets_bulk = true;
    s.grid = {0.3};
    s.observables = {"gap"};
    const SpinNetwork net = network_at(s, 0.3);
    for (const Bond& b : net.bonds()) CHECK(b.coupling.z == 0.3);
    s.kz_sets_bulk = false;
    const SpinNetwork surf = network_at(s, 0.3);
    for (const Bond& b : surf.bonds()) CHECK(b.coupling.z == (b.weight == 1.0 ? 0.5 : 0.3));

    s.geometry = "nested_squares";
    s.parameter = "lambda2";
    CHECK(network_at(s, 0.004).num_sites() == 8);
    s.geometry = "ring";
    s.parameter = "size";
    CHECK(network_at(s, 10).num_sites() == 12);
    s.geometry = "modular";
    s.parameter = "blocks";
    CHECK(network_at(s, 3).num_sites() == 14);
  }

  TEST_CASE("fidelity observable needs four surface spins") {
    SweepSpec s;
    s.geometry = "square4";
    s.params.ferro = true;
    s.grid = {0.05, 0.01};
    s.observables = {"fidelity:z0"};
    const auto f = run_sweep(s).table.series("fidelity:z0");
    CHECK(f[1] > f[0]);
    CHECK(f[1] > 0.99);
    s.geometry = "square2";
    CHECK(kind_of([&] { s.validate(); }) == ErrorKind::Spec);
  }

  TEST_CASE("grids") {
    const auto g = logspace(1e-2, 1.0, 3);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == doctest::Approx(1e-2));
    CHECK(g[1] == doctest::Approx(1e-1));
    CHECK(g[2] == doctest::Approx(1.0));
    CHECK(linspace_step(0.0, 1.0, 0.25).size() == 5);
    CHECK(linspace_step(-0.5, 1.5, 0.005).size() == 401);
    CHECK(default_lambda_grid().size() == 25);
  }

  TEST_CASE("figure presets") {
    CHECK(kind_of([] { figure_specs(9); }) == ErrorKind::UnknownFigure);
    for (int n = 1; n <= 8; ++n) {
      for (const auto& [stem, spec] : figure_specs(n)) {
        CAPTURE(stem);
        CHECK_NOTHROW(spec.validate());
      }
    }
    FigureOptions small;
    small.max_ring = 6;
    const auto dir = std::filesystem::temp_directory_path() / "spinsurf_fig3_test";
    std::filesystem::remove_all(dir);
    const auto paths = figure(3, dir, small);
    CHECK(paths.size() >= 2);
    for (const auto& p : paths) CHECK(std::filesystem::exists(p));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("frustration comparison") {
    const FrustrationTable t = compare_frustration({0.2});
    REQUIRE(t.lambda.size() == 1);
    CHECK(t.square_antiferro[0] <= t.square_ferro[0]);
    CHECK(t.pentagon_antiferro[0] <= t.pentagon_ferro[0]);
    CHECK(t.antiferro_below_ferro);
    std::ostringstream out;
    write_csv(t, out);
    CHECK(out.str().find("pentagon") != std::string::npos);
  }
}
