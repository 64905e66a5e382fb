#include "spinsurf/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "spinsurf/effective.hpp"
#include "spinsurf/entanglement.hpp"
#include "spinsurf/errors.hpp"

#ifndef SPINSURF_VERSION
#define SPINSURF_VERSION "0.0.0"
#endif

namespace spinsurf {

using nlohmann::json;

namespace {

const std::vector<std::string> kParameters = {"lambda", "lambda2", "kz", "jz", "size", "blocks", "ratio"};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class ObsKind { Concurrence, Gap, Energy, FidelityZ0, ResidualTangle, TraceDistance };

struct Observable {
  ObsKind kind;
  std::vector<std::string> sites;  // unresolved labels or ids
};

Observable parse_observable(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::vector<std::string> args;
  if (!tail.empty()) {
    std::stringstream ss(tail);
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(item);
  }
  if (head == "concurrence") {
    if (!(args.empty() || args.size() == 2)) fail(ErrorKind::Spec, "concurrence takes two sites: " + text);
    return {ObsKind::Concurrence, args};
  }
  if (head == "gap" && args.empty()) return {ObsKind::Gap, {}};
  if (head == "energy" && args.empty()) return {ObsKind::Energy, {}};
  if (head == "fidelity") {
    if (tail != "z0") fail(ErrorKind::Spec, "only fidelity:z0 is available as an observable");
    return {ObsKind::FidelityZ0, {}};
  }
  if (head == "residual_tangle") {
    if (args.size() != 1) fail(ErrorKind::Spec, "residual_tangle takes one surface site: " + text);
    return {ObsKind::ResidualTangle, args};
  }
  if (head == "trace_distance" && args.empty()) return {ObsKind::TraceDistance, {}};
  fail(ErrorKind::Spec, "unknown observable '" + text + "'");
}

int resolve_site(const SpinNetwork& net, const std::string& token) {
  int id = net.find_label(token);
  if (id >= 0) return id;
  try {
    std::size_t used = 0;
    id = std::stoi(token, &used);
    if (used == token.size() && id >= 0 && id < net.num_sites()) return id;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Spec, "site '" + token + "' does not exist in the network");
}

std::vector<int> resolve_sites(const SpinNetwork& net, const Observable& obs) {
  std::vector<int> out;
  if (obs.kind == ObsKind::Concurrence && obs.sites.empty()) {
    const std::vector<int> surf = net.surface_sites();
    if (surf.size() < 2) fail(ErrorKind::Spec, "default concurrence needs two surface sites");
    return {surf[0], surf[1]};
  }
  if (obs.kind == ObsKind::FidelityZ0 && net.surface_sites().size() != 4) {
    fail(ErrorKind::Spec, "fidelity:z0 needs exactly four surface spins");
  }
  for (const std::string& s : obs.sites) out.push_back(resolve_site(net, s));
  if (obs.kind == ObsKind::Concurrence && out[0] == out[1]) {
    fail(ErrorKind::Spec, "concurrence needs two distinct sites");
  }
  if (obs.kind == ObsKind::ResidualTangle && !net.is_surface(out[0])) {
    fail(ErrorKind::Spec, "residual_tangle site must be a surface spin");
  }
  return out;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

json params_json(const GeometryParams& p) {
  json j = {{"lambda", p.lambda},
            {"bulk", {p.bulk.x, p.bulk.y, p.bulk.z}},
            {"surface", {p.surface.x, p.surface.y, p.surface.z}},
            {"ferro", p.ferro},
            {"n_bulk", p.n_bulk},
            {"blocks", p.blocks}};
  if (p.lambda_prime) j["lambda_prime"] = *p.lambda_prime;
  if (p.ratio) j["ratio"] = *p.ratio;
  return j;
}

json diagnostics_json(const PointDiagnostics& d) {
  json j = {{"status", d.status},
            {"network_hash", hex64(d.network_hash)},
            {"n_sites", d.n_sites},
            {"ground_degenerate", d.ground_degenerate},
            {"max_residual", d.max_residual},
            {"matvecs", d.matvecs},
            {"sectors", d.sectors}};
  if (!d.message.empty()) j["message"] = d.message;
  return j;
}

struct PointResult {
  std::vector<double> values;
  PointDiagnostics diag;
};

PointResult evaluate_point(const SweepSpec& spec, const std::vector<Observable>& observables,
                           double value) {
  PointResult out;
  out.values.assign(observables.size(), kNaN);
  try {
    const SpinNetwork net = network_at(spec, value);
    out.diag.network_hash = net.hash();
    out.diag.n_sites = net.num_sites();

    bool need_exact = false, need_effective = false;
    for (const Observable& o : observables) {
      if (o.kind == ObsKind::ResidualTangle || o.kind == ObsKind::TraceDistance) need_effective = true;
      if (o.kind != ObsKind::ResidualTangle) need_exact = true;
    }
    SpectrumResult exact;
    if (need_exact) {
      exact = ground_and_gap(net, spec.solver);
      out.diag.ground_degenerate = exact.ground_degenerate;
      out.diag.matvecs = exact.matvecs;
      out.diag.sectors = exact.sectors;
      for (double r : exact.residual_norms) out.diag.max_residual = std::max(out.diag.max_residual, r);
    }
    std::optional<EffectiveHamiltonian> eff;
    std::optional<EffectiveGround> eg;
    if (need_effective) {
      eff = effective_couplings(net, EffectiveMethod::Auto, spec.solver);
      eg = effective_ground(*eff);
    }

    for (std::size_t k = 0; k < observables.size(); ++k) {
      const Observable& o = observables[k];
      switch (o.kind) {
        case ObsKind::Concurrence:
          out.values[k] = concurrence(ground_density(exact, resolve_sites(net, o)));
          break;
        case ObsKind::Gap:
          out.values[k] = exact.gap;
          break;
        case ObsKind::Energy:
          out.values[k] = exact.ground_energy();
          break;
        case ObsKind::FidelityZ0: {
          const std::vector<int> surf = net.surface_sites();
          if (surf.size() != 4) fail(ErrorKind::Spec, "fidelity:z0 needs exactly four surface spins");
          out.values[k] = fidelity(ground_density(exact, surf), make_z0());
          break;
        }
        case ObsKind::ResidualTangle: {
          const int site = resolve_sites(net, o)[0];
          const auto it = std::find(eff->surface_sites.begin(), eff->surface_sites.end(), site);
          if (eg->spectrum.ground_multiplicity() > 1) {
            out.diag.message = "effective ground state is degenerate; residual tangle undefined";
            break;
          }
          out.values[k] = residual_tangle(eg->ground, static_cast<int>(it - eff->surface_sites.begin()));
          break;
        }
        case ObsKind::TraceDistance:
          out.values[k] = trace_distance(ground_density(exact, eff->surface_sites), eg->density);
          break;
      }
    }
  } catch (const Error& e) {
    out.diag.status = std::string(to_string(e.kind()));
    out.diag.message = e.what();
    std::fill(out.values.begin(), out.values.end(), kNaN);
  } catch (const std::bad_alloc&) {
    out.diag.status = std::string(to_string(ErrorKind::ResourceCap));
    out.diag.message = "out of memory";
    std::fill(out.values.begin(), out.values.end(), kNaN);
  }
  return out;
}

}  // namespace

void SweepSpec::validate() const {
  if (grid.empty()) fail(ErrorKind::Spec, "sweep grid is empty");
  for (double v : grid) {
    if (!std::isfinite(v)) fail(ErrorKind::Spec, "sweep grid contains a non-finite value");
  }
  if (grid.size() > 1) {
    const bool up = grid[1] > grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (up ? !(grid[k] > grid[k - 1]) : !(grid[k] < grid[k - 1])) {
        fail(ErrorKind::Spec, "sweep grid must be strictly monotone");
      }
    }
  }
  if (std::find(kParameters.begin(), kParameters.end(), parameter) == kParameters.end()) {
    fail(ErrorKind::Spec, "unknown sweep parameter '" + parameter + "'");
  }
  if (network && parameter != "lambda") {
    fail(ErrorKind::Spec, "a fixed network can only be swept in lambda");
  }
  if (!network && std::find(geometry_names().begin(), geometry_names().end(), geometry) ==
                      geometry_names().end()) {
    fail(ErrorKind::Spec, "unknown geometry '" + geometry + "'");
  }
  if (observables.empty()) fail(ErrorKind::Spec, "no observables requested");
  std::vector<Observable> parsed;
  for (const std::string& o : observables) parsed.push_back(parse_observable(o));
  // Site references are checked against the first grid point when it builds.
  std::optional<SpinNetwork> first;
  try {
    first = network_at(*this, grid.front());
  } catch (const Error&) {
  }
  if (first) {
    for (const Observable& o : parsed) resolve_sites(*first, o);
  }
}

json SweepSpec::to_json() const {
  json j = {{"parameter", parameter},
            {"grid", grid},
            {"observables", observables},
            {"kz_sets_bulk", kz_sets_bulk},
            {"solver",
             {{"tol", solver.tol},
              {"krylov_dim", solver.krylov_dim},
              {"max_restarts", solver.max_restarts},
              {"seed", solver.seed},
              {"dense_threshold", solver.dense_threshold},
              {"max_dim", solver.max_dim},
              {"degeneracy_rel", solver.degeneracy_rel}}}};
  if (network) {
    j["network_hash"] = hex64(network->hash());
  } else {
    j["geometry"] = geometry;
    j["params"] = params_json(params);
  }
  return j;
}

std::size_t SweepTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) fail(ErrorKind::Spec, "no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> SweepTable::series(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& row : values) out.push_back(row[c]);
  return out;
}

json RunManifest::reproducible_json() const {
  json pts = json::array();
  for (const PointDiagnostics& d : points) pts.push_back(diagnostics_json(d));
  return {{"tool", "spinsurf"}, {"version", tool_version}, {"spec", spec.to_json()}, {"points", pts}};
}

json RunManifest::to_json() const {
  json j = reproducible_json();
  j["manifest_hash"] = hash_hex();
  j["wall_seconds"] = wall_seconds;
  j["threads"] = spec.threads;
  return j;
}

std::string RunManifest::hash_hex() const { return hex64(fnv1a(reproducible_json().dump())); }

SpinNetwork network_at(const SweepSpec& spec, double value) {
  if (spec.network) {
    if (spec.parameter != "lambda") fail(ErrorKind::Spec, "a fixed network can only be swept in lambda");
    if (!(value > 0.0 && value <= 1.0)) fail(ErrorKind::BadParams, "lambda must lie in (0,1]");
    return spec.network->with_surface_weight(value);
  }
  GeometryParams p = spec.params;
  const std::string& name = spec.parameter;
  if (name == "lambda") {
    p.lambda = value;
  } else if (name == "lambda2") {
    p.lambda_prime = value;
  } else if (name == "kz") {
    // The value is the antiferro Kz; a ferro network flips it with the rest.
    p.surface.z = value;
    if (spec.kz_sets_bulk) p.bulk.z = value;
  } else if (name == "jz") {
    p.bulk.z = value;
  } else if (name == "size") {
    p.n_bulk = static_cast<int>(std::lround(value));
  } else if (name == "blocks") {
    p.blocks = static_cast<int>(std::lround(value));
  } else if (name == "ratio") {
    p.ratio = value;
  } else {
    fail(ErrorKind::Spec, "unknown sweep parameter '" + name + "'");
  }
  return make_geometry(spec.geometry, p);
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<Observable> observables;
  for (const std::string& o : spec.observables) observables.push_back(parse_observable(o));

  const std::size_t n = spec.grid.size();
  std::vector<PointResult> results(n);
  const unsigned workers = std::max(1U, std::min<unsigned>(spec.threads, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      results[k] = evaluate_point(spec, observables, spec.grid[k]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  SweepResult out;
  out.table.parameter = spec.parameter;
  out.table.columns = spec.observables;
  out.table.grid = spec.grid;
  out.manifest.tool_version = SPINSURF_VERSION;
  out.manifest.spec = spec;
  for (PointResult& r : results) {
    out.table.values.push_back(std::move(r.values));
    out.table.diagnostics.push_back(r.diag);
    out.manifest.points.push_back(std::move(r.diag));
  }
  out.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_csv(const SweepResult& result, std::ostream& out) {
  const SweepTable& t = result.table;
  const json header = {{"tool", "spinsurf"},
                       {"version", result.manifest.tool_version},
                       {"manifest_hash", result.manifest.hash_hex()},
                       {"parameter", t.parameter},
                       {"seed", result.manifest.spec.solver.seed}};
  out << "# " << header.dump() << '\n';
  out << t.parameter;
  for (const std::string& c : t.columns) out << ',' << c;
  out << ",n_sites,ground_degenerate,status\n";
  for (std::size_t r = 0; r < t.grid.size(); ++r) {
    out << format_number(t.grid[r]);
    for (double v : t.values[r]) out << ',' << format_number(v);
    const PointDiagnostics& d = t.diagnostics[r];
    out << ',' << d.n_sites << ',' << (d.ground_degenerate ? 1 : 0) << ',' << d.status << '\n';
  }
}

void write_json(const SweepResult& result, std::ostream& out) {
  const SweepTable& t = result.table;
  json rows = json::array();
  for (std::size_t r = 0; r < t.grid.size(); ++r) {
    json row = {{t.parameter, t.grid[r]}};
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const double v = t.values[r][c];
      row[t.columns[c]] = std::isnan(v) ? json(nullptr) : json(v);
    }
    row["status"] = t.diagnostics[r].status;
    rows.push_back(row);
  }
  out << json{{"manifest", result.manifest.to_json()}, {"rows", rows}}.dump(2) << '\n';
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi > 0.0)) fail(ErrorKind::Spec, "logspace needs n >= 1 and positive ends");
  if (n == 1) return {lo};
  std::vector<double> out;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < n; ++k) out.push_back(std::pow(10.0, a + (b - a) * k / (n - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linspace_step(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) fail(ErrorKind::Spec, "linspace needs step > 0 and hi >= lo");
  std::vector<double> out;
  const long count = std::lround(std::floor((hi - lo) / step + 0.5));
  for (long k = 0; k <= count; ++k) out.push_back(lo + step * static_cast<double>(k));
  return out;
}

std::vector<double> default_lambda_grid() { return logspace(1e-2, 1.0, 25); }

std::vector<std::pair<std::string, SweepSpec>> figure_specs(int n, const FigureOptions& opts) {
  std::vector<std::pair<std::string, SweepSpec>> out;
  auto base = [&](const std::string& geometry) {
    SweepSpec s;
    s.geometry = geometry;
    s.solver = opts.solver;
    s.threads = opts.threads;
    return s;
  };
  const Coupling xx = model_coupling("xx");
  const Coupling xxz = model_coupling("xxz");

  switch (n) {
    case 1:
      for (const std::string g : {"square2", "cube2"}) {
        for (const auto& [model, c] : {std::pair{"xx", xx}, std::pair{"xxz", xxz}}) {
          SweepSpec s = base(g);
          s.params.bulk = s.params.surface = c;
          s.grid = default_lambda_grid();
          s.observables = {"concurrence", "gap"};
          out.emplace_back("fig1_" + g + "_" + model, s);
        }
      }
      break;
    case 2:
      for (const std::string g : {"square2", "cube2"}) {
        SweepSpec s = base(g);
        s.params.bulk = s.params.surface = xxz;
        s.params.lambda = 0.1;
        s.parameter = "kz";
        s.kz_sets_bulk = true;
        s.grid = linspace_step(-0.5, 1.5, 0.005);
        s.observables = {"concurrence", "gap"};
        out.emplace_back("fig2_" + g, s);
      }
      break;
    case 3: {
      int max_ring = opts.max_ring;
      if (max_ring <= 0) {
        max_ring = 4;
        while ((std::size_t{1} << (max_ring + 4)) <= opts.solver.max_dim) max_ring += 2;
      }
      for (double lam : {0.05, 0.1}) {
        SweepSpec s = base("ring");
        s.params.ferro = true;
        s.params.lambda = lam;
        s.parameter = "size";
        s.grid = linspace_step(4, max_ring, 2);
        s.observables = {"concurrence", "gap"};
        out.emplace_back(lam == 0.05 ? "fig3_lambda0.05" : "fig3_lambda0.1", s);
      }
      break;
    }
    case 4:
      for (const std::string g : {"frustrated_square", "frustrated_pentagon"}) {
        for (bool ferro : {false, true}) {
          SweepSpec s = base(g);
          s.params.ferro = ferro;
          s.grid = linspace_step(0.01, 0.5, 0.01);
          s.observables = {"concurrence", "gap"};
          out.emplace_back("fig4_" + g + (ferro ? "_ferro" : "_antiferro"), s);
        }
      }
      break;
    case 5:
      for (double lam : {0.05, 0.1}) {
        for (bool ferro : {false, true}) {
          SweepSpec s = base("modular");
          s.params.ferro = ferro;
          s.params.lambda = lam;
          s.parameter = "blocks";
          s.grid = linspace_step(1, opts.max_blocks, 1);
          s.observables = {"concurrence", "gap"};
          out.emplace_back(std::string("fig5_lambda") + (lam == 0.05 ? "0.05" : "0.1") +
                               (ferro ? "_ferro" : "_antiferro"),
                           s);
        }
      }
      break;
    case 6:
      for (const std::string g : {"nested_squares", "double_square"}) {
        SweepSpec s = base(g);
        s.grid = default_lambda_grid();
        s.observables = {"concurrence:S1,S2", "concurrence:S3,S4", "gap"};
        out.emplace_back("fig6_" + g, s);
      }
      break;
    case 7: {
      SweepSpec s = base("ring8");
      s.params.lambda = 0.05;
      s.parameter = "ratio";
      s.grid = {1.0, 0.5, 0.3, 0.2, 0.1, 0.05};
      s.observables = {"concurrence:S1,S2", "concurrence:S3,S4", "concurrence:S5,S6",
                       "concurrence:S7,S8", "gap"};
      out.emplace_back("fig7_ring8", s);
      break;
    }
    case 8:
      for (const std::string g : {"square4", "cube4"}) {
        SweepSpec s = base(g);
        s.params.ferro = true;
        s.grid = default_lambda_grid();
        s.observables = {"fidelity:z0", "gap"};
        out.emplace_back("fig8_" + g, s);
      }
      break;
    default:
      fail(ErrorKind::UnknownFigure, "no figure " + std::to_string(n) + " (expected 1..8)");
  }
  return out;
}

std::vector<std::filesystem::path> figure(int n, const std::filesystem::path& dir,
                                          const FigureOptions& opts) {
  const auto specs = figure_specs(n, opts);
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  std::vector<std::string> columns;
  std::string parameter;
  for (const auto& [stem, spec] : specs) {
    const SweepResult r = run_sweep(spec);
    const auto path = dir / (stem + ".csv");
    std::ofstream f(path);
    write_csv(r, f);
    written.push_back(path);
    columns = spec.observables;
    parameter = spec.parameter;
  }

  // Column 1 is the swept value; observables follow; n_sites comes right after them.
  const std::size_t n_sites_col = columns.size() + 2;
  const bool by_size = parameter == "size";
  const auto script = dir / ("fig" + std::to_string(n) + ".gp");
  std::ofstream gp(script);
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set terminal pngcairo size 800,600\n";
  if (parameter == "lambda") gp << "set logscale x\n";
  gp << "set xlabel '" << (by_size ? "total spins" : parameter) << "'\n";
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::string name = columns[c];
    std::replace(name.begin(), name.end(), ':', '_');
    std::replace(name.begin(), name.end(), ',', '_');
    gp << "set output 'fig" << n << "_" << name << ".png'\n"
       << "set ylabel '" << columns[c] << "'\n"
       << "plot ";
    for (std::size_t s = 0; s < specs.size(); ++s) {
      gp << (s ? ", \\\n     " : "") << "'" << specs[s].first << ".csv' using "
         << (by_size ? n_sites_col : 1) << ":" << c + 2 << " with linespoints title '"
         << specs[s].first << "'";
    }
    gp << "\n";
  }
  written.push_back(script);
  return written;
}

FrustrationTable compare_frustration(const std::vector<double>& lambda_grid,
                                     const SolverOptions& opts, unsigned threads) {
  FrustrationTable t;
  t.lambda = lambda_grid;
  auto run = [&](const std::string& g, bool ferro) {
    SweepSpec s;
    s.geometry = g;
    s.params.ferro = ferro;
    s.grid = lambda_grid;
    s.observables = {"concurrence"};
    s.solver = opts;
    s.threads = threads;
    return run_sweep(s).table.series("concurrence");
  };
  t.square_antiferro = run("frustrated_square", false);
  t.square_ferro = run("frustrated_square", true);
  t.pentagon_antiferro = run("frustrated_pentagon", false);
  t.pentagon_ferro = run("frustrated_pentagon", true);
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    const double lam = lambda_grid[k];
    if (lam < 0.05 - 1e-12 || lam > 0.5 + 1e-12) continue;
    if (!(t.square_antiferro[k] <= t.square_ferro[k] + 1e-12) ||
        !(t.pentagon_antiferro[k] <= t.pentagon_ferro[k] + 1e-12)) {
      t.antiferro_below_ferro = false;
    }
  }
  return t;
}

void write_csv(const FrustrationTable& t, std::ostream& out) {
  out << "lambda,square_antiferro,square_ferro,pentagon_antiferro,pentagon_ferro\n";
  for (std::size_t k = 0; k < t.lambda.size(); ++k) {
    out << format_number(t.lambda[k]) << ',' << format_number(t.square_antiferro[k]) << ','
        << format_number(t.square_ferro[k]) << ',' << format_number(t.pentagon_antiferro[k]) << ','
        << format_number(t.pentagon_ferro[k]) << '\n';
  }
}

}  // namespace spinsurf
