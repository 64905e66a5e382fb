#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinsurf/effective.hpp"
#include "spinsurf/eigensolver.hpp"
#include "spinsurf/entanglement.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/geometry.hpp"
#include "spinsurf/network.hpp"
#include "spinsurf/operator.hpp"
#include "spinsurf/sweep.hpp"

using namespace spinsurf;
using nlohmann::json;

namespace {

/// "0.1", "0.1,0.2", "lin:a:b:step" or "log:a:b:n".
std::vector<double> parse_grid(const std::string& text) {
  auto numbers = [&](const std::string& s, char sep) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        fail(ErrorKind::Spec, "bad number '" + item + "' in grid '" + text + "'");
      }
    }
    return out;
  };
  if (text.rfind("lin:", 0) == 0) {
    const auto v = numbers(text.substr(4), ':');
    if (v.size() != 3) fail(ErrorKind::Spec, "lin grid needs lin:a:b:step");
    return linspace_step(v[0], v[1], v[2]);
  }
  if (text.rfind("log:", 0) == 0) {
    const auto v = numbers(text.substr(4), ':');
    if (v.size() != 3) fail(ErrorKind::Spec, "log grid needs log:a:b:n");
    return logspace(v[0], v[1], static_cast<int>(v[2]));
  }
  return numbers(text, ',');
}

struct NetworkArgs {
  std::string network;
  std::string geometry;
  std::string model = "xx";
  std::string sign = "antiferro";
  std::string lambda;
  std::string kz;
  std::optional<double> lambda_prime;
  std::optional<double> ratio;
  int size = 6;
  int blocks = 2;
  bool tie_bulk_jz = false;

  void add(CLI::App* app, bool grid_lambda) {
    app->add_option("--network", network, "network JSON file");
    app->add_option("--geometry", geometry, "catalog geometry key");
    app->add_option("--model", model, "xx, xxz, xxx or ising")->capture_default_str();
    app->add_option("--sign", sign, "ferro or antiferro")
        ->check(CLI::IsMember({"ferro", "antiferro"}))
        ->capture_default_str();
    app->add_option("--lambda", lambda, grid_lambda ? "surface weight, value or grid" : "surface weight");
    app->add_option("--kz", kz, "surface Kz, value or grid");
    app->add_option("--lambda-prime", lambda_prime, "second-pair weight (default lambda^2)");
    app->add_option("--ratio", ratio, "ring8 hierarchy ratio (default lambda)");
    app->add_option("--size", size, "ring bulk size")->capture_default_str();
    app->add_option("--blocks", blocks, "modular block count")->capture_default_str();
    app->add_flag("--tie-bulk-jz", tie_bulk_jz, "kz also sets the bulk Jz");
  }

  GeometryParams params() const {
    GeometryParams p;
    p.bulk = p.surface = model_coupling(model);
    p.ferro = sign == "ferro";
    p.lambda_prime = lambda_prime;
    p.ratio = ratio;
    p.n_bulk = size;
    p.blocks = blocks;
    if (!lambda.empty()) {
      const auto g = parse_grid(lambda);
      if (g.size() == 1) p.lambda = g[0];
    }
    if (!kz.empty()) {
      const auto g = parse_grid(kz);
      if (g.size() == 1) {
        p.surface.z = g[0];
        if (tie_bulk_jz) p.bulk.z = g[0];
      }
    }
    return p;
  }

  /// Single network; lambda overrides surface weights of a loaded file.
  SpinNetwork build() const {
    if (!network.empty() && !geometry.empty()) fail(ErrorKind::Spec, "give either --network or --geometry");
    if (!network.empty()) {
      SpinNetwork net = load_network(network);
      if (!lambda.empty()) {
        const auto g = parse_grid(lambda);
        if (g.size() != 1) fail(ErrorKind::Spec, "--lambda must be a single value here");
        net = net.with_surface_weight(g[0]);
      }
      return net;
    }
    if (geometry.empty()) fail(ErrorKind::Spec, "--network or --geometry is required");
    if (!lambda.empty() && parse_grid(lambda).size() != 1) {
      fail(ErrorKind::Spec, "--lambda must be a single value here");
    }
    return make_geometry(geometry, params());
  }
};

struct SolverArgs {
  std::uint64_t seed = SolverOptions{}.seed;
  std::size_t max_dim = SolverOptions{}.max_dim;
  double tol = SolverOptions{}.tol;
  unsigned threads = 1;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Lanczos start-vector seed")->capture_default_str();
    app->add_option("--max-dim", max_dim, "cap on the Hilbert-space dimension 2^n")->capture_default_str();
    app->add_option("--tol", tol, "Lanczos residual tolerance")->capture_default_str();
    app->add_option("--threads", threads, "worker threads for sweeps")->capture_default_str();
  }
  SolverOptions options() const {
    SolverOptions o;
    o.seed = seed;
    o.max_dim = max_dim;
    o.tol = tol;
    return o;
  }
};

void emit(const json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream f(out);
    f << doc.dump(2) << '\n';
  }
}

json spectrum_json(const SpectrumResult& r) {
  return {{"eigenvalues", r.eigenvalues},
          {"gap", r.gap},
          {"ground_degenerate", r.ground_degenerate},
          {"degeneracy_threshold", r.degeneracy_threshold},
          {"residual_norms", r.residual_norms},
          {"sectors", r.sectors},
          {"seed", r.seed},
          {"matvecs", r.matvecs}};
}

json error_json(const Error& e) {
  return {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization of spin-1/2 XYZ networks with weakly coupled surface spins"};
  app.set_version_flag("--version", SPINSURF_VERSION);
  app.require_subcommand(1);

  std::string out;
  std::string format = "csv";

  // validate
  auto* validate = app.add_subcommand("validate", "check a network file");
  std::string validate_file;
  validate->add_option("file", validate_file, "network JSON")->required();

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "ground state and gap of H_T");
  NetworkArgs spectrum_net;
  SolverArgs spectrum_solver;
  std::string mtx;
  spectrum_net.add(spectrum, false);
  spectrum_solver.add(spectrum);
  spectrum->add_option("--out", out, "output JSON (default stdout)");
  spectrum->add_option("--matrix-market", mtx, "also dump H_T in the full basis");

  // concurrence
  auto* conc = app.add_subcommand("concurrence", "surface concurrence of the ground state");
  NetworkArgs conc_net;
  SolverArgs conc_solver;
  std::string pair;
  conc_net.add(conc, false);
  conc_solver.add(conc);
  conc->add_option("--pair", pair, "two site labels or ids, e.g. S1,S2 (default first two surface spins)");
  conc->add_option("--out", out, "output JSON (default stdout)");

  // effective
  auto* effective = app.add_subcommand("effective", "second-order effective surface Hamiltonian");
  NetworkArgs eff_net;
  SolverArgs eff_solver;
  std::string method = "auto";
  std::string validate_grid;
  effective->add_option("network_file", eff_net.network, "network JSON");
  eff_net.add(effective, false);
  eff_solver.add(effective);
  effective->add_option("--method", method, "sum-over-states, resolvent or auto")
      ->check(CLI::IsMember({"sum-over-states", "resolvent", "auto"}))
      ->capture_default_str();
  effective->add_option("--validate", validate_grid, "lambda grid for comparison with exact results");
  effective->add_option("--out", out, "output JSON (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  NetworkArgs sweep_net;
  SolverArgs sweep_solver;
  std::string parameter;
  std::string grid;
  std::vector<std::string> observables;
  sweep_net.add(sweep, true);
  sweep_solver.add(sweep);
  sweep->add_option("--param", parameter, "lambda, lambda2, kz, jz, size, blocks or ratio");
  sweep->add_option("--grid", grid, "grid for --param");
  sweep->add_option("--observable", observables, "observable spec (repeatable)");
  sweep->add_option("--out", out, "output file (default stdout)");
  sweep->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // figure
  auto* fig = app.add_subcommand("figure", "write the data and gnuplot script of a figure preset");
  int fig_n = 0;
  SolverArgs fig_solver;
  int max_ring = 0;
  std::string fig_dir = ".";
  fig->add_option("n", fig_n, "figure number 1..8")->required();
  fig->add_option("--out", fig_dir, "output directory")->capture_default_str();
  fig->add_option("--max-ring", max_ring, "largest ring bulk for figure 3 (default: dimension cap)");
  fig_solver.add(fig);

  // compare-frustration
  auto* frus = app.add_subcommand("compare-frustration", "frustrated vs unfrustrated concurrence");
  std::string frus_grid = "lin:0.05:0.5:0.05";
  SolverArgs frus_solver;
  frus->add_option("--lambda", frus_grid, "lambda grid")->capture_default_str();
  frus->add_option("--out", out, "output CSV (default stdout)");
  frus_solver.add(frus);

  // catalog
  auto* catalog = app.add_subcommand("catalog", "write the default geometry catalog as JSON files");
  std::string catalog_dir = "networks";
  catalog->add_option("--out", catalog_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) {
      try {
        const SpinNetwork net = load_network(validate_file);
        const SymmetryClass cls = classify_symmetry(net);
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(net.hash()));
        std::cout << json{{"valid", true},
                          {"sites", net.num_sites()},
                          {"bulk", net.bulk_sites().size()},
                          {"surface", net.surface_sites().size()},
                          {"bonds", net.bonds().size()},
                          {"symmetry", std::string(to_string(cls.tag))},
                          {"hash", hash}}
                         .dump(2)
                  << '\n';
        return 0;
      } catch (const Error& e) {
        json report = error_json(e);
        report["valid"] = false;
        report["file"] = validate_file;
        std::cerr << report.dump(2) << '\n';
        return 1;
      }
    }

    if (*spectrum) {
      const SpinNetwork net = spectrum_net.build();
      const SpectrumResult r = ground_and_gap(net, spectrum_solver.options());
      json doc = spectrum_json(r);
      doc["symmetry"] = std::string(to_string(classify_symmetry(net).tag));
      emit(doc, out);
      if (!mtx.empty()) {
        std::ofstream f(mtx);
        write_matrix_market(assemble_hamiltonian(net, SectorBasis(net.num_sites(), SectorConstraint::none())), f);
      }
      return 0;
    }

    if (*conc) {
      const SpinNetwork net = conc_net.build();
      const SpectrumResult r = ground_and_gap(net, conc_solver.options());
      std::vector<int> sites;
      if (pair.empty()) {
        const auto surf = net.surface_sites();
        if (surf.size() < 2) fail(ErrorKind::Spec, "network has fewer than two surface spins");
        sites = {surf[0], surf[1]};
      } else {
        std::stringstream ss(pair);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          int id = net.find_label(tok);
          if (id < 0) id = std::stoi(tok);
          sites.push_back(id);
        }
      }
      const DensityMatrix rho = ground_density(r, sites);
      emit({{"sites", sites},
            {"concurrence", concurrence(rho)},
            {"gap", r.gap},
            {"ground_energy", r.ground_energy()},
            {"ground_degenerate", r.ground_degenerate}},
           out);
      return 0;
    }

    if (*effective) {
      const SpinNetwork net = eff_net.build();
      const SolverOptions opts = eff_solver.options();
      const EffectiveMethod m = method == "sum-over-states" ? EffectiveMethod::SumOverStates
                                : method == "resolvent"     ? EffectiveMethod::Resolvent
                                                            : EffectiveMethod::Auto;
      const EffectiveHamiltonian eff = effective_couplings(net, m, opts);
      json doc = to_json(eff);
      if (eff.size() <= kMaxReducedSites) {
        const EffectiveGround eg = effective_ground(eff);
        doc["effective_spectrum"] = eg.spectrum.eigenvalues;
        doc["effective_gap"] = eg.spectrum.gap;
        doc["effective_ground_degenerate"] = eg.spectrum.ground_degenerate;
      }
      if (!validate_grid.empty()) {
        doc["validation"] = validate_effective(net, parse_grid(validate_grid), opts).to_json();
      }
      emit(doc, out);
      return 0;
    }

    if (*sweep) {
      SweepSpec spec;
      spec.solver = sweep_solver.options();
      spec.threads = sweep_solver.threads;
      spec.observables = observables;
      spec.kz_sets_bulk = sweep_net.tie_bulk_jz;
      if (!sweep_net.network.empty()) {
        spec.network = load_network(sweep_net.network);
      } else {
        spec.geometry = sweep_net.geometry;
        spec.params = sweep_net.params();
      }
      if (parameter.empty()) {
        if (!grid.empty()) fail(ErrorKind::Spec, "--grid needs --param");
        if (!sweep_net.kz.empty() && parse_grid(sweep_net.kz).size() > 1) {
          spec.parameter = "kz";
          spec.grid = parse_grid(sweep_net.kz);
        } else {
          spec.parameter = "lambda";
          spec.grid = sweep_net.lambda.empty() ? default_lambda_grid() : parse_grid(sweep_net.lambda);
        }
      } else {
        spec.parameter = parameter;
        if (grid.empty()) fail(ErrorKind::Spec, "--param needs --grid");
        spec.grid = parse_grid(grid);
      }
      const SweepResult r = run_sweep(spec);
      std::ofstream file;
      std::ostream* os = &std::cout;
      if (!out.empty() && out != "-") {
        file.open(out);
        os = &file;
      }
      if (format == "json") {
        write_json(r, *os);
      } else {
        write_csv(r, *os);
      }
      if (!out.empty() && out != "-") {
        std::ofstream manifest(out + ".manifest.json");
        manifest << r.manifest.to_json().dump(2) << '\n';
      }
      return 0;
    }

    if (*fig) {
      FigureOptions fo;
      fo.solver = fig_solver.options();
      fo.threads = fig_solver.threads;
      fo.max_ring = max_ring;
      for (const auto& p : figure(fig_n, fig_dir, fo)) std::cout << p.string() << '\n';
      return 0;
    }

    if (*frus) {
      const FrustrationTable t = compare_frustration(parse_grid(frus_grid), frus_solver.options(), frus_solver.threads);
      std::ofstream file;
      std::ostream* os = &std::cout;
      if (!out.empty() && out != "-") {
        file.open(out);
        os = &file;
      }
      write_csv(t, *os);
      std::cerr << "antiferro <= ferro on [0.05, 0.5]: " << (t.antiferro_below_ferro ? "yes" : "no") << '\n';
      return 0;
    }

    if (*catalog) {
      write_catalog(catalog_dir);
      for (const auto& e : default_catalog()) std::cout << catalog_dir << '/' << e.file_stem << ".json\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << error_json(e).dump(2) << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump(2) << '\n';
    return 1;
  }
  return 0;
}
