#include "spinsurf/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spinsurf/errors.hpp"

namespace spinsurf {

using nlohmann::json;

double Coupling::max_abs() const {
  return std::max({std::abs(x), std::abs(y), std::abs(z)});
}

SpinNetwork::SpinNetwork(std::vector<Site> sites, std::vector<Bond> bonds, json meta)
    : sites_(std::move(sites)), bonds_(std::move(bonds)), meta_(std::move(meta)) {
  std::sort(sites_.begin(), sites_.end(),
            [](const Site& a, const Site& b) { return a.id < b.id; });
  validate();
}

void SpinNetwork::validate() const {
  auto invalid = [](const std::string& what) { fail(ErrorKind::Validation, what); };

  const int n = num_sites();
  if (n < 1) invalid("network has no sites");
  if (n > 62) invalid("more than 62 sites are not supported by the 64-bit basis encoding");
  for (int k = 0; k < n; ++k) {
    if (sites_[k].id != k) {
      invalid("site ids must be exactly 0..n-1 without gaps or duplicates");
    }
  }

  std::set<std::pair<int, int>> seen;
  std::vector<int> surface_degree(n, 0);
  for (const Bond& b : bonds_) {
    if (b.i < 0 || b.i >= n || b.j < 0 || b.j >= n) {
      invalid("bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
              ") references an unknown site");
    }
    if (b.i == b.j) invalid("self bond on site " + std::to_string(b.i));
    const auto key = std::minmax(b.i, b.j);
    if (!seen.insert({key.first, key.second}).second) {
      invalid("duplicate bond between sites " + std::to_string(key.first) + " and " +
              std::to_string(key.second));
    }
    const Coupling& c = b.coupling;
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z)) {
      invalid("non-finite coupling on bond (" + std::to_string(b.i) + "," +
              std::to_string(b.j) + ")");
    }
    if (!(b.weight > 0.0 && b.weight <= 1.0)) {
      invalid("bond weight must lie in (0,1], got " + std::to_string(b.weight));
    }
    const bool si = is_surface(b.i);
    const bool sj = is_surface(b.j);
    if (si && sj) {
      invalid("surface sites " + std::to_string(b.i) + " and " + std::to_string(b.j) +
              " are bonded to each other");
    }
    if (si) ++surface_degree[b.i];
    if (sj) ++surface_degree[b.j];
  }

  int bulk = 0;
  for (const Site& s : sites_) {
    if (s.kind == SiteKind::Bulk) {
      ++bulk;
    } else if (surface_degree[s.id] != 1) {
      invalid("surface site " + std::to_string(s.id) + " must have exactly one bond, has " +
              std::to_string(surface_degree[s.id]));
    }
  }
  if (bulk == 0) invalid("network has no bulk sites");
  if (bulk % 2 != 0) invalid("number of bulk sites is odd (" + std::to_string(bulk) + ")");
}

std::vector<int> SpinNetwork::bulk_sites() const {
  std::vector<int> out;
  for (const Site& s : sites_) {
    if (s.kind == SiteKind::Bulk) out.push_back(s.id);
  }
  return out;
}

std::vector<int> SpinNetwork::surface_sites() const {
  std::vector<int> out;
  for (const Site& s : sites_) {
    if (s.kind == SiteKind::Surface) out.push_back(s.id);
  }
  return out;
}

std::size_t SpinNetwork::surface_link(int surface_site) const {
  for (std::size_t k = 0; k < bonds_.size(); ++k) {
    if (bonds_[k].i == surface_site || bonds_[k].j == surface_site) return k;
  }
  fail(ErrorKind::Validation, "site " + std::to_string(surface_site) + " has no surface link");
}

int SpinNetwork::attachment(int surface_site) const {
  const Bond& b = bonds_[surface_link(surface_site)];
  return b.i == surface_site ? b.j : b.i;
}

int SpinNetwork::find_label(const std::string& label) const {
  for (const Site& s : sites_) {
    if (s.label == label) return s.id;
  }
  return -1;
}

SpinNetwork SpinNetwork::with_surface_weight(double lambda) const {
  std::vector<Bond> bonds = bonds_;
  for (Bond& b : bonds) {
    if (is_surface(b.i) || is_surface(b.j)) b.weight = lambda;
  }
  return SpinNetwork(sites_, std::move(bonds), meta_);
}

SpinNetwork SpinNetwork::with_scaled_couplings(double factor) const {
  std::vector<Bond> bonds = bonds_;
  for (Bond& b : bonds) b.coupling = b.coupling.scaled(factor);
  return SpinNetwork(sites_, std::move(bonds), meta_);
}

std::uint64_t SpinNetwork::hash() const {
  json doc = to_json(*this);
  doc.erase("meta");
  const std::string text = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

BulkView bulk_view(const SpinNetwork& net) {
  BulkView view;
  view.bulk_ids = net.bulk_sites();
  view.original_to_bulk.assign(net.num_sites(), -1);
  for (std::size_t k = 0; k < view.bulk_ids.size(); ++k) {
    view.original_to_bulk[view.bulk_ids[k]] = static_cast<int>(k);
  }
  for (const Bond& b : net.bonds()) {
    const int a = view.original_to_bulk[b.i];
    const int c = view.original_to_bulk[b.j];
    if (a >= 0 && c >= 0) view.bonds.push_back({a, c, b.coupling, b.weight});
  }
  return view;
}

json to_json(const SpinNetwork& net) {
  json sites = json::array();
  for (const Site& s : net.sites()) {
    sites.push_back({{"id", s.id},
                     {"label", s.label},
                     {"kind", s.kind == SiteKind::Bulk ? "bulk" : "surface"}});
  }
  json bonds = json::array();
  for (const Bond& b : net.bonds()) {
    bonds.push_back({{"i", b.i},
                     {"j", b.j},
                     {"Jx", b.coupling.x},
                     {"Jy", b.coupling.y},
                     {"Jz", b.coupling.z},
                     {"weight", b.weight}});
  }
  return {{"sites", sites}, {"bonds", bonds}, {"meta", net.meta().is_null() ? json::object() : net.meta()}};
}

SpinNetwork network_from_json(const json& doc) {
  std::vector<Site> sites;
  std::vector<Bond> bonds;
  try {
    if (!doc.is_object()) fail(ErrorKind::Parse, "network document must be a JSON object");
    if (!doc.contains("sites") || !doc.at("sites").is_array()) {
      fail(ErrorKind::Parse, "missing array 'sites'");
    }
    if (!doc.contains("bonds") || !doc.at("bonds").is_array()) {
      fail(ErrorKind::Parse, "missing array 'bonds'");
    }
    for (const json& s : doc.at("sites")) {
      Site site;
      site.id = s.at("id").get<int>();
      site.label = s.value("label", "s" + std::to_string(site.id));
      const std::string kind = s.at("kind").get<std::string>();
      if (kind == "bulk") {
        site.kind = SiteKind::Bulk;
      } else if (kind == "surface") {
        site.kind = SiteKind::Surface;
      } else {
        fail(ErrorKind::Parse, "site kind must be 'bulk' or 'surface', got '" + kind + "'");
      }
      sites.push_back(std::move(site));
    }
    for (const json& b : doc.at("bonds")) {
      Bond bond;
      bond.i = b.at("i").get<int>();
      bond.j = b.at("j").get<int>();
      bond.coupling = {b.at("Jx").get<double>(), b.at("Jy").get<double>(),
                       b.at("Jz").get<double>()};
      bond.weight = b.value("weight", 1.0);
      bonds.push_back(bond);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed network: ") + e.what());
  }
  std::set<int> ids;
  for (const Site& s : sites) {
    if (!ids.insert(s.id).second) {
      fail(ErrorKind::Validation, "duplicate site id " + std::to_string(s.id));
    }
  }
  return SpinNetwork(std::move(sites), std::move(bonds), doc.value("meta", json::object()));
}

SpinNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open network file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return network_from_json(doc);
}

void save_network(const SpinNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Parse, "cannot write network file " + path.string());
  out << to_json(net).dump(2) << '\n';
}

std::string_view to_string(SymmetryTag tag) {
  switch (tag) {
    case SymmetryTag::Ising: return "Ising";
    case SymmetryTag::XY: return "XY";
    case SymmetryTag::XX: return "XX";
    case SymmetryTag::XXZ: return "XXZ";
    case SymmetryTag::XXX: return "XXX";
    case SymmetryTag::XYZ: return "XYZ";
  }
  return "XYZ";
}

SymmetryClass classify_couplings(const std::vector<Coupling>& couplings, double tol) {
  double scale = 0.0;
  for (const Coupling& c : couplings) scale = std::max(scale, c.max_abs());

  SymmetryClass cls;
  cls.tolerance = tol * scale;
  const double t = cls.tolerance;
  auto same = [t](double a, double b) { return std::abs(a - b) <= t; };
  auto zero = [t](double a) { return std::abs(a) <= t; };

  cls.xy_equal = std::all_of(couplings.begin(), couplings.end(),
                             [&](const Coupling& c) { return same(c.x, c.y); });
  cls.z_zero = std::all_of(couplings.begin(), couplings.end(),
                           [&](const Coupling& c) { return zero(c.z); });
  cls.xyz_equal = cls.xy_equal && std::all_of(couplings.begin(), couplings.end(),
                                              [&](const Coupling& c) { return same(c.y, c.z); });
  bool used[3] = {false, false, false};
  for (const Coupling& c : couplings) {
    used[0] = used[0] || !zero(c.x);
    used[1] = used[1] || !zero(c.y);
    used[2] = used[2] || !zero(c.z);
  }
  if (used[0] + used[1] + used[2] == 1) cls.single_axis = used[0] ? 0 : (used[1] ? 1 : 2);

  if (cls.xyz_equal) {
    cls.tag = SymmetryTag::XXX;
  } else if (cls.xy_equal && cls.z_zero) {
    cls.tag = SymmetryTag::XX;
  } else if (cls.single_axis >= 0) {
    cls.tag = SymmetryTag::Ising;
  } else if (cls.xy_equal) {
    cls.tag = SymmetryTag::XXZ;
  } else if (cls.z_zero) {
    cls.tag = SymmetryTag::XY;
  } else {
    cls.tag = SymmetryTag::XYZ;
  }
  return cls;
}

SymmetryClass classify_symmetry(const SpinNetwork& net, double tol) {
  std::vector<Coupling> couplings;
  couplings.reserve(net.bonds().size());
  for (const Bond& b : net.bonds()) couplings.push_back(b.coupling);
  return classify_couplings(couplings, tol);
}

}  // namespace spinsurf
