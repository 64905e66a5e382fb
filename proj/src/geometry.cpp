#include "spinsurf/geometry.hpp"

#include <cmath>

#include "spinsurf/errors.hpp"

namespace spinsurf {

using nlohmann::json;

namespace {

void check_weight(const char* what, double w) {
  if (!(w > 0.0 && w <= 1.0)) {
    fail(ErrorKind::BadParams,
         std::string(what) + " must lie in (0,1], got " + std::to_string(w));
  }
}

class Builder {
public:
  Builder(const GeometryParams& p, int n_bulk) : p_(p), n_bulk_(n_bulk) {
    for (int k = 0; k < n_bulk; ++k) sites_.push_back({k, "B" + std::to_string(k), SiteKind::Bulk});
  }

  void bulk_bond(int i, int j, double weight = 1.0) {
    bonds_.push_back({i, j, sign(p_.bulk), weight});
  }

  void surface(int attach, double lambda) {
    const int id = static_cast<int>(sites_.size());
    sites_.push_back({id, "S" + std::to_string(id - n_bulk_ + 1), SiteKind::Surface});
    bonds_.push_back({id, attach, sign(p_.surface), lambda});
  }

  SpinNetwork finish(const std::string& name, json extra = json::object()) {
    json params = {{"lambda", p_.lambda},
                   {"bulk", {p_.bulk.x, p_.bulk.y, p_.bulk.z}},
                   {"surface", {p_.surface.x, p_.surface.y, p_.surface.z}},
                   {"ferro", p_.ferro}};
    params.update(extra);
    return SpinNetwork(std::move(sites_), std::move(bonds_),
                       {{"geometry", name}, {"params", params}});
  }

private:
  Coupling sign(const Coupling& c) const { return p_.ferro ? c.scaled(-1.0) : c; }

  const GeometryParams& p_;
  int n_bulk_;
  std::vector<Site> sites_;
  std::vector<Bond> bonds_;
};

void square_bonds(Builder& b, int offset) {
  for (int k = 0; k < 4; ++k) b.bulk_bond(offset + k, offset + (k + 1) % 4);
}

void cube_bonds(Builder& b) {
  for (int v = 0; v < 8; ++v) {
    for (int d : {1, 2, 4}) {
      if (!(v & d)) b.bulk_bond(v, v | d);
    }
  }
}

double second_pair_weight(const GeometryParams& p) {
  const double w = p.lambda_prime.value_or(p.lambda * p.lambda);
  check_weight("lambda_prime", w);
  return w;
}

}  // namespace

Coupling model_coupling(const std::string& model) {
  if (model == "xx") return {1.0, 1.0, 0.0};
  if (model == "xxz") return {1.0, 1.0, 0.5};
  if (model == "xxx") return {1.0, 1.0, 1.0};
  if (model == "ising") return {0.0, 0.0, 1.0};
  fail(ErrorKind::BadParams, "unknown model '" + model + "' (expected xx, xxz, xxx, ising)");
}

const std::vector<std::string>& geometry_names() {
  static const std::vector<std::string> names = {
      "square2", "cube2", "ring", "frustrated_square", "frustrated_pentagon", "modular",
      "nested_squares", "double_square", "ring8", "square4", "cube4"};
  return names;
}

SpinNetwork make_geometry(const std::string& name, const GeometryParams& p) {
  check_weight("lambda", p.lambda);
  const double lam = p.lambda;

  if (name == "square2") {
    Builder b(p, 4);
    square_bonds(b, 0);
    b.surface(0, lam);
    b.surface(2, lam);
    return b.finish(name);
  }
  if (name == "cube2") {
    Builder b(p, 8);
    cube_bonds(b);
    b.surface(0, lam);
    b.surface(7, lam);
    return b.finish(name);
  }
  if (name == "ring") {
    const int n = p.n_bulk;
    if (n < 4 || n > 60 || n % 2 != 0) {
      fail(ErrorKind::BadParams, "ring needs an even bulk size in [4,60], got " + std::to_string(n));
    }
    Builder b(p, n);
    for (int k = 0; k < n; ++k) b.bulk_bond(k, (k + 1) % n);
    b.surface(0, lam);
    b.surface(n / 2, lam);
    return b.finish(name, {{"n_bulk", n}});
  }
  if (name == "frustrated_square") {
    // Four edges plus the diagonal joining the two attachment corners.
    Builder b(p, 4);
    square_bonds(b, 0);
    b.bulk_bond(0, 2);
    b.surface(0, lam);
    b.surface(2, lam);
    return b.finish(name);
  }
  if (name == "frustrated_pentagon") {
    // Five-bond pentagonal loop 0-1-2-3-4 plus an apex spin 5 on the 4-0 edge,
    // which keeps the bulk even.
    Builder b(p, 6);
    for (int k = 0; k < 5; ++k) b.bulk_bond(k, (k + 1) % 5);
    b.bulk_bond(4, 5);
    b.bulk_bond(5, 0);
    b.surface(2, lam);
    b.surface(5, lam);
    return b.finish(name);
  }
  if (name == "modular") {
    const int m = p.blocks;
    if (m < 1 || m > 14) {
      fail(ErrorKind::BadParams, "modular needs 1..14 blocks, got " + std::to_string(m));
    }
    Builder b(p, 4 * m);
    for (int k = 0; k < m; ++k) {
      square_bonds(b, 4 * k);
      if (k + 1 < m) b.bulk_bond(4 * k + 2, 4 * (k + 1), lam);
    }
    b.surface(0, lam);
    b.surface(4 * (m - 1) + 2, lam);
    return b.finish(name, {{"blocks", m}});
  }
  if (name == "nested_squares") {
    const double lp = second_pair_weight(p);
    Builder b(p, 4);
    square_bonds(b, 0);
    b.surface(0, lam);
    b.surface(1, lam);
    b.surface(2, lp);
    b.surface(3, lp);
    return b.finish(name, {{"lambda_prime", lp}});
  }
  if (name == "double_square") {
    const double lp = second_pair_weight(p);
    Builder b(p, 8);
    square_bonds(b, 0);
    square_bonds(b, 4);
    for (int k = 0; k < 4; ++k) b.bulk_bond(k, k + 4);
    b.surface(0, lam);
    b.surface(1, lam);
    b.surface(6, lp);
    b.surface(7, lp);
    return b.finish(name, {{"lambda_prime", lp}});
  }
  if (name == "ring8") {
    const double r = p.ratio.value_or(lam);
    check_weight("ratio", r);
    Builder b(p, 8);
    for (int k = 0; k < 8; ++k) b.bulk_bond(k, (k + 1) % 8);
    const int anchors[4] = {0, 2, 1, 3};
    double w = lam;
    for (int pair = 0; pair < 4; ++pair) {
      b.surface(anchors[pair], w);
      b.surface(anchors[pair] + 4, w);
      w *= r;
    }
    return b.finish(name, {{"ratio", r}});
  }
  if (name == "square4") {
    Builder b(p, 4);
    square_bonds(b, 0);
    for (int k = 0; k < 4; ++k) b.surface(k, lam);
    return b.finish(name);
  }
  if (name == "cube4") {
    // Tetrahedral corners: every pair of surface anchors is a face diagonal.
    Builder b(p, 8);
    cube_bonds(b);
    for (int v : {0, 3, 5, 6}) b.surface(v, lam);
    return b.finish(name);
  }
  fail(ErrorKind::UnknownGeometry, "unknown geometry '" + name + "'");
}

std::vector<CatalogEntry> default_catalog() {
  std::vector<CatalogEntry> out;
  GeometryParams base;
  for (const char* g : {"square2", "cube2", "frustrated_square", "frustrated_pentagon",
                               "nested_squares", "double_square", "ring8", "square4", "cube4"}) {
    out.push_back({g, g, base});
  }
  for (int n : {4, 6, 8, 10, 12}) {
    GeometryParams p = base;
    p.n_bulk = n;
    out.push_back({"ring_n" + std::to_string(n), "ring", p});
  }
  for (int m : {1, 2, 3, 4}) {
    GeometryParams p = base;
    p.blocks = m;
    out.push_back({"modular" + std::to_string(m), "modular", p});
  }
  return out;
}

void write_catalog(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const CatalogEntry& e : default_catalog()) {
    save_network(make_geometry(e.geometry, e.params), dir / (e.file_stem + ".json"));
  }
}

}  // namespace spinsurf
