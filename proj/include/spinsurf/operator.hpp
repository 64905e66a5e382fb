#pragma once

#include <memory>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "spinsurf/basis.hpp"
#include "spinsurf/network.hpp"

namespace spinsurf {

using Vector = Eigen::VectorXd;

/// Real operator in compressed-row form over a SectorBasis.
class SparseOperator {
public:
  SparseOperator() = default;
  SparseOperator(std::size_t dim, std::vector<std::size_t> row_ptr, std::vector<std::size_t> cols,
                 std::vector<double> values, bool hermitian);

  static SparseOperator identity(std::size_t dim);
  static SparseOperator zero(std::size_t dim);
  static SparseOperator diagonal(std::span<const double> diag);

  std::size_t dimension() const { return dim_; }
  std::size_t nonzeros() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x, rows summed left to right so results are reproducible bit for bit.
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Largest absolute row sum, an upper bound on the spectral norm.
  double norm_bound() const;

  /// max |A_ij - A_ji|.
  double asymmetry() const;

  Eigen::MatrixXd to_dense() const;

  SparseOperator scaled(double factor) const;

private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
  bool hermitian_ = false;
};

/// Throws DimensionMismatch when sizes disagree.
Vector apply(const SparseOperator& op, const Vector& v);

/// <v|op|v> / <v|v>. Throws DimensionMismatch or ZeroVector.
double expectation(const SparseOperator& op, const Vector& v);

/// sum over bonds of weight * (Jx XX + Jy YY + Jz ZZ) restricted to the basis.
/// Throws SectorNotConserved if a bond connects the sector to its complement.
SparseOperator assemble_bonds(const std::vector<Bond>& bonds, const SectorBasis& basis);

/// H_T of the network; the basis must span every site.
SparseOperator assemble_hamiltonian(const SpinNetwork& net, const SectorBasis& basis);

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Product of single-site Pauli matrices. Strings with an odd number of sigma^y
/// are imaginary and rejected (BadParams); factors on the same site are not allowed.
SparseOperator pauli_string(const std::vector<std::pair<int, Axis>>& factors,
                            const SectorBasis& basis);

/// Sum_i sigma^z_i.
SparseOperator total_magnetization(const SectorBasis& basis);

/// Writes a Matrix Market coordinate file (1-based indices, real general).
void write_matrix_market(const SparseOperator& op, std::ostream& out);

}  // namespace spinsurf
