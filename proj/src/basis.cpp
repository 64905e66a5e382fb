#include "spinsurf/basis.hpp"

#include <cstdlib>

#include "spinsurf/errors.hpp"

namespace spinsurf {

std::string SectorConstraint::describe() const {
  switch (kind) {
    case Kind::None: return "full";
    case Kind::Magnetization: return "M=" + std::to_string(value);
    case Kind::ZParity: return "Pz=" + std::to_string(value);
  }
  return "?";
}

SectorBasis::SectorBasis(int n_sites, SectorConstraint constraint)
    : n_sites_(n_sites), constraint_(constraint) {
  if (n_sites < 1 || n_sites > 62) {
    fail(ErrorKind::BadSector, "basis needs 1..62 sites, got " + std::to_string(n_sites));
  }
  const Label full = Label{1} << n_sites;

  switch (constraint.kind) {
    case SectorConstraint::Kind::None:
      if (n_sites > 40) fail(ErrorKind::TooLarge, "unconstrained basis over 40 sites");
      states_.resize(full);
      for (Label s = 0; s < full; ++s) states_[s] = s;
      break;

    case SectorConstraint::Kind::Magnetization: {
      const int m = constraint.value;
      if (std::abs(m) > n_sites || (m + n_sites) % 2 != 0) {
        fail(ErrorKind::BadSector, "magnetization " + std::to_string(m) +
                                       " is infeasible for " + std::to_string(n_sites) + " sites");
      }
      const int up = (m + n_sites) / 2;
      binom_.assign(n_sites + 1, std::vector<std::uint64_t>(n_sites + 1, 0));
      for (int a = 0; a <= n_sites; ++a) {
        binom_[a][0] = 1;
        for (int b = 1; b <= a; ++b) binom_[a][b] = binom_[a - 1][b - 1] + binom_[a - 1][b];
      }
      if (binom_[n_sites][up] > (std::uint64_t{1} << 34)) {
        fail(ErrorKind::TooLarge, "sector dimension exceeds 2^34");
      }
      states_.reserve(binom_[n_sites][up]);
      if (up == 0) {
        states_.push_back(0);
        break;
      }
      // Gosper's hack enumerates fixed-popcount labels in increasing order.
      Label s = (Label{1} << up) - 1;
      while (s < full) {
        states_.push_back(s);
        const Label c = s & (~s + 1);
        const Label r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
      }
      break;
    }

    case SectorConstraint::Kind::ZParity: {
      if (constraint.value != 1 && constraint.value != -1) {
        fail(ErrorKind::BadSector, "z-parity must be +1 or -1");
      }
      if (n_sites > 41) fail(ErrorKind::TooLarge, "parity sector over 41 sites");
      // Parity +1 <=> even number of down spins.
      states_.reserve(full / 2);
      for (Label s = 0; s < full; ++s) {
        const int down = n_sites - __builtin_popcountll(s);
        if ((down % 2 == 0) == (constraint.value == 1)) states_.push_back(s);
      }
      break;
    }
  }
}

bool SectorBasis::contains(Label s) const {
  if (n_sites_ < 64 && (s >> n_sites_) != 0) return false;
  switch (constraint_.kind) {
    case SectorConstraint::Kind::None: return true;
    case SectorConstraint::Kind::Magnetization:
      return magnetization_of(s, n_sites_) == constraint_.value;
    case SectorConstraint::Kind::ZParity: {
      const int down = n_sites_ - __builtin_popcountll(s);
      return (down % 2 == 0) == (constraint_.value == 1);
    }
  }
  return false;
}

std::size_t SectorBasis::index(Label s) const {
  switch (constraint_.kind) {
    case SectorConstraint::Kind::None:
      return static_cast<std::size_t>(s);
    case SectorConstraint::Kind::ZParity:
      // Exactly one label of each pair (2k, 2k+1) has the requested parity.
      return static_cast<std::size_t>(s >> 1);
    case SectorConstraint::Kind::Magnetization: {
      // Combinatorial number system: rank = sum over set bits of C(pos, rank_of_bit).
      std::size_t rank = 0;
      int k = 0;
      Label t = s;
      while (t) {
        const int pos = __builtin_ctzll(t);
        ++k;
        rank += binom_[pos][k];
        t &= t - 1;
      }
      return rank;
    }
  }
  return 0;
}

std::size_t SectorBasis::find(Label s) const {
  return contains(s) ? index(s) : size();
}

SectorBasis build_basis(int n_sites, SectorConstraint constraint) {
  return SectorBasis(n_sites, constraint);
}

}  // namespace spinsurf
