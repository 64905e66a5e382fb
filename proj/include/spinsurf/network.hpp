#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinsurf {

enum class SiteKind { Bulk, Surface };

/// Exchange constants (Jx, Jy, Jz) of a single bond, multiplying sigma^a sigma^a.
struct Coupling {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Coupling scaled(double factor) const { return {x * factor, y * factor, z * factor}; }
  double max_abs() const;
  friend bool operator==(const Coupling&, const Coupling&) = default;
};

struct Site {
  int id = 0;
  std::string label;
  SiteKind kind = SiteKind::Bulk;
  friend bool operator==(const Site&, const Site&) = default;
};

/// Bond between sites i and j. For a surface link `weight` is lambda_j and
/// `coupling` is K_j; bulk-bulk bonds normally carry weight 1.
struct Bond {
  int i = 0;
  int j = 0;
  Coupling coupling;
  double weight = 1.0;
  friend bool operator==(const Bond&, const Bond&) = default;
};

/// Validated spin network. Site ids are the positions 0..n-1 and double as bit
/// indices of the computational basis.
class SpinNetwork {
public:
  SpinNetwork() = default;

  /// Takes sites in any order; they are stored sorted by id. Throws
  /// Error(Validation) when an invariant fails.
  SpinNetwork(std::vector<Site> sites, std::vector<Bond> bonds, nlohmann::json meta = {});

  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const nlohmann::json& meta() const { return meta_; }

  int num_sites() const { return static_cast<int>(sites_.size()); }
  std::vector<int> bulk_sites() const;
  std::vector<int> surface_sites() const;
  bool is_surface(int site) const { return sites_.at(site).kind == SiteKind::Surface; }

  /// Index into bonds() of the unique bond touching a surface site.
  std::size_t surface_link(int surface_site) const;
  /// Bulk site the surface site is attached to.
  int attachment(int surface_site) const;

  /// Site id for a label, or -1.
  int find_label(const std::string& label) const;

  /// Same network with every surface-link weight replaced by `lambda`.
  SpinNetwork with_surface_weight(double lambda) const;
  /// Same network with all couplings multiplied by `factor`.
  SpinNetwork with_scaled_couplings(double factor) const;

  /// Stable 64-bit FNV-1a hash of the canonical JSON form.
  std::uint64_t hash() const;

private:
  void validate() const;

  std::vector<Site> sites_;
  std::vector<Bond> bonds_;
  nlohmann::json meta_;
};

/// Bulk-only network: bulk sites renumbered 0..nB-1 in ascending original id
/// order, keeping only bulk-bulk bonds. Not validated against surface rules.
struct BulkView {
  std::vector<int> bulk_ids;           // new index -> original id
  std::vector<int> original_to_bulk;   // original id -> new index or -1
  std::vector<Bond> bonds;             // renumbered
};
BulkView bulk_view(const SpinNetwork& net);

nlohmann::json to_json(const SpinNetwork& net);
SpinNetwork network_from_json(const nlohmann::json& doc);

SpinNetwork load_network(const std::filesystem::path& path);
void save_network(const SpinNetwork& net, const std::filesystem::path& path);

enum class SymmetryTag { Ising, XY, XX, XXZ, XXX, XYZ };

std::string_view to_string(SymmetryTag tag);

struct SymmetryClass {
  SymmetryTag tag = SymmetryTag::XYZ;
  // Witnessing relations, each holding for every bond within tolerance.
  bool xy_equal = false;     // Jx == Jy
  bool z_zero = false;       // Jz == 0
  bool xyz_equal = false;    // Jx == Jy == Jz
  int single_axis = -1;      // 0/1/2 when only that component is ever nonzero
  double tolerance = 0.0;    // absolute tolerance actually used

  bool conserves_magnetization() const { return xy_equal; }
};

inline constexpr double kDefaultSymmetryTol = 1e-12;

/// Classifies a list of couplings; `tol` is relative to the largest |J|.
SymmetryClass classify_couplings(const std::vector<Coupling>& couplings,
                                 double tol = kDefaultSymmetryTol);
SymmetryClass classify_symmetry(const SpinNetwork& net, double tol = kDefaultSymmetryTol);

}  // namespace spinsurf
