#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spinsurf {

using Label = std::uint64_t;

/// Conserved quantity restricting a basis. Magnetization is M = sum_i sigma^z_i
/// (so M = 2*popcount - n); z-parity is prod_i sigma^z_i = +-1.
struct SectorConstraint {
  enum class Kind { None, Magnetization, ZParity };
  Kind kind = Kind::None;
  int value = 0;

  static SectorConstraint none() { return {}; }
  static SectorConstraint magnetization(int m) { return {Kind::Magnetization, m}; }
  static SectorConstraint z_parity(int p) { return {Kind::ZParity, p}; }

  std::string describe() const;
  friend bool operator==(const SectorConstraint&, const SectorConstraint&) = default;
};

/// Computational basis restricted to a sector. Bit i of a label is site i;
/// a set bit is spin up (sigma^z = +1). Labels are stored in increasing order.
class SectorBasis {
public:
  SectorBasis(int n_sites, SectorConstraint constraint);

  int n_sites() const { return n_sites_; }
  const SectorConstraint& constraint() const { return constraint_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<Label>& states() const { return states_; }
  Label state(std::size_t k) const { return states_[k]; }

  bool contains(Label s) const;
  /// Position of a label; the label must satisfy the constraint.
  std::size_t index(Label s) const;
  /// Like index() but returns size() for labels outside the sector.
  std::size_t find(Label s) const;

private:
  int n_sites_;
  SectorConstraint constraint_;
  std::vector<Label> states_;
  std::vector<std::vector<std::uint64_t>> binom_;  // Pascal table for ranking
};

SectorBasis build_basis(int n_sites, SectorConstraint constraint = SectorConstraint::none());

inline int magnetization_of(Label s, int n_sites) {
  return 2 * __builtin_popcountll(s) - n_sites;
}

}  // namespace spinsurf
