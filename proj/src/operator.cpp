#include "spinsurf/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spinsurf/errors.hpp"

namespace spinsurf {

SparseOperator::SparseOperator(std::size_t dim, std::vector<std::size_t> row_ptr,
                               std::vector<std::size_t> cols, std::vector<double> values,
                               bool hermitian)
    : dim_(dim),
      row_ptr_(std::move(row_ptr)),
      cols_(std::move(cols)),
      values_(std::move(values)),
      hermitian_(hermitian) {
  if (row_ptr_.size() != dim_ + 1 || cols_.size() != values_.size() ||
      row_ptr_.back() != values_.size()) {
    fail(ErrorKind::DimensionMismatch, "inconsistent compressed-row arrays");
  }
}

SparseOperator SparseOperator::identity(std::size_t dim) {
  std::vector<double> ones(dim, 1.0);
  return diagonal(ones);
}

SparseOperator SparseOperator::zero(std::size_t dim) {
  return SparseOperator(dim, std::vector<std::size_t>(dim + 1, 0), {}, {}, true);
}

SparseOperator SparseOperator::diagonal(std::span<const double> diag) {
  const std::size_t n = diag.size();
  std::vector<std::size_t> row_ptr(n + 1), cols(n);
  for (std::size_t k = 0; k < n; ++k) {
    row_ptr[k] = k;
    cols[k] = k;
  }
  row_ptr[n] = n;
  return SparseOperator(n, std::move(row_ptr), std::move(cols),
                        std::vector<double>(diag.begin(), diag.end()), true);
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim_ || y.size() != dim_) {
    fail(ErrorKind::DimensionMismatch, "operator of dimension " + std::to_string(dim_) +
                                           " applied to vector of size " +
                                           std::to_string(x.size()));
  }
  const std::size_t* rp = row_ptr_.data();
  const std::size_t* cp = cols_.data();
  const double* vp = values_.data();
  for (std::size_t r = 0; r < dim_; ++r) {
    double acc = 0.0;
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) acc += vp[k] * x[cp[k]];
    y[r] = acc;
  }
}

double SparseOperator::norm_bound() const {
  double best = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

double SparseOperator::asymmetry() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const std::size_t c = cols_[k];
      // Columns are sorted within a row.
      auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[c]);
      auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[c + 1]);
      auto it = std::lower_bound(first, last, r);
      const double mirror = (it != last && *it == r) ? values_[it - cols_.begin()] : 0.0;
      worst = std::max(worst, std::abs(values_[k] - mirror));
    }
  }
  return worst;
}

Eigen::MatrixXd SparseOperator::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim_),
                                            static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[k])) += values_[k];
    }
  }
  return m;
}

SparseOperator SparseOperator::scaled(double factor) const {
  SparseOperator out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

Vector apply(const SparseOperator& op, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != op.dimension()) {
    fail(ErrorKind::DimensionMismatch, "vector size " + std::to_string(v.size()) +
                                           " does not match operator dimension " +
                                           std::to_string(op.dimension()));
  }
  Vector out(v.size());
  op.apply({v.data(), static_cast<std::size_t>(v.size())},
           {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

double expectation(const SparseOperator& op, const Vector& v) {
  const Vector hv = apply(op, v);
  const double norm2 = v.squaredNorm();
  if (norm2 == 0.0) fail(ErrorKind::ZeroVector, "expectation value of the zero vector");
  return v.dot(hv) / norm2;
}

namespace {

struct Entry {
  std::size_t col;
  double value;
};

// Sorts row entries by column, merges duplicates and drops exact zeros.
void flush_row(std::vector<Entry>& row, std::vector<std::size_t>& cols,
               std::vector<double>& values) {
  std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
  std::size_t k = 0;
  while (k < row.size()) {
    const std::size_t c = row[k].col;
    double sum = 0.0;
    for (; k < row.size() && row[k].col == c; ++k) sum += row[k].value;
    if (sum != 0.0) {
      cols.push_back(c);
      values.push_back(sum);
    }
  }
  row.clear();
}

}  // namespace

SparseOperator assemble_bonds(const std::vector<Bond>& bonds, const SectorBasis& basis) {
  const int n = basis.n_sites();
  double scale = 0.0;
  for (const Bond& b : bonds) {
    if (b.i < 0 || b.i >= n || b.j < 0 || b.j >= n || b.i == b.j) {
      fail(ErrorKind::DimensionMismatch, "bond outside the basis sites");
    }
    scale = std::max(scale, b.weight * b.coupling.max_abs());
  }
  const double drop = 1e-12 * scale;

  const std::size_t dim = basis.size();
  std::vector<std::size_t> row_ptr;
  row_ptr.reserve(dim + 1);
  row_ptr.push_back(0);
  std::vector<std::size_t> cols;
  std::vector<double> values;
  cols.reserve(dim * (bonds.size() / 2 + 1));
  values.reserve(dim * (bonds.size() / 2 + 1));
  std::vector<Entry> row;

  for (std::size_t r = 0; r < dim; ++r) {
    const Label s = basis.state(r);
    double diag = 0.0;
    for (const Bond& b : bonds) {
      const bool equal = (((s >> b.i) ^ (s >> b.j)) & 1U) == 0;
      const double parity = equal ? 1.0 : -1.0;
      diag += b.weight * b.coupling.z * parity;
      // XX gives +1 on every flip; YY gives -1 for parallel and +1 for antiparallel pairs.
      const double amp = b.weight * (b.coupling.x - b.coupling.y * parity);
      if (amp == 0.0) continue;
      const Label t = s ^ ((Label{1} << b.i) | (Label{1} << b.j));
      const std::size_t c = basis.find(t);
      if (c == basis.size()) {
        if (std::abs(amp) <= drop) continue;
        fail(ErrorKind::SectorNotConserved,
             "bond (" + std::to_string(b.i) + "," + std::to_string(b.j) + ") leaves sector " +
                 basis.constraint().describe());
      }
      row.push_back({c, amp});
    }
    row.push_back({r, diag});
    flush_row(row, cols, values);
    row_ptr.push_back(cols.size());
  }
  return SparseOperator(dim, std::move(row_ptr), std::move(cols), std::move(values), true);
}

SparseOperator assemble_hamiltonian(const SpinNetwork& net, const SectorBasis& basis) {
  if (basis.n_sites() != net.num_sites()) {
    fail(ErrorKind::DimensionMismatch, "basis has " + std::to_string(basis.n_sites()) +
                                           " sites, network has " +
                                           std::to_string(net.num_sites()));
  }
  if (basis.constraint().kind == SectorConstraint::Kind::Magnetization &&
      !classify_symmetry(net).conserves_magnetization()) {
    fail(ErrorKind::SectorNotConserved,
         "magnetization sector requested for a network with Jx != Jy");
  }
  return assemble_bonds(net.bonds(), basis);
}

SparseOperator pauli_string(const std::vector<std::pair<int, Axis>>& factors,
                            const SectorBasis& basis) {
  Label flip = 0;
  Label seen = 0;
  int n_y = 0;
  for (const auto& [site, axis] : factors) {
    if (site < 0 || site >= basis.n_sites()) fail(ErrorKind::BadParams, "Pauli factor off the basis");
    const Label bit = Label{1} << site;
    if (seen & bit) fail(ErrorKind::BadParams, "repeated site in Pauli string");
    seen |= bit;
    if (axis != Axis::Z) flip |= bit;
    if (axis == Axis::Y) ++n_y;
  }
  if (n_y % 2 != 0) fail(ErrorKind::BadParams, "Pauli string with an odd number of sigma^y is not real");
  const double y_phase = (n_y / 2) % 2 == 0 ? 1.0 : -1.0;  // i^{n_y}

  const std::size_t dim = basis.size();
  std::vector<std::size_t> row_ptr(dim + 1, 0), cols(dim);
  std::vector<double> values(dim);
  // Each row of a Pauli string has a single entry; store row r -> column c with <r|P|c>.
  std::vector<std::pair<std::size_t, double>> by_row(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const Label s = basis.state(c);
    double amp = y_phase;
    for (const auto& [site, axis] : factors) {
      const bool up = (s >> site) & 1U;
      if (axis == Axis::Z) amp *= up ? 1.0 : -1.0;
      // sigma^y|up> = i|down>, sigma^y|down> = -i|up>; the i's are in y_phase.
      if (axis == Axis::Y) amp *= up ? 1.0 : -1.0;
    }
    const std::size_t r = basis.find(s ^ flip);
    if (r == dim) fail(ErrorKind::SectorNotConserved, "Pauli string leaves the sector");
    by_row[r] = {c, amp};
  }
  for (std::size_t r = 0; r < dim; ++r) {
    row_ptr[r + 1] = r + 1;
    cols[r] = by_row[r].first;
    values[r] = by_row[r].second;
  }
  return SparseOperator(dim, std::move(row_ptr), std::move(cols), std::move(values), true);
}

SparseOperator total_magnetization(const SectorBasis& basis) {
  std::vector<double> diag(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    diag[k] = magnetization_of(basis.state(k), basis.n_sites());
  }
  return SparseOperator::diagonal(diag);
}

void write_matrix_market(const SparseOperator& op, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << op.dimension() << ' ' << op.dimension() << ' ' << op.nonzeros() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < op.dimension(); ++r) {
    for (std::size_t k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", op.values()[k]);
      out << r + 1 << ' ' << op.cols()[k] + 1 << ' ' << buf << '\n';
    }
  }
}

}  // namespace spinsurf
