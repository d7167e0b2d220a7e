#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lmm {

using Index = std::ptrdiff_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse column matrix. Row indices are strictly increasing
/// within each column. Explicitly stored zeros are kept: the pattern is
/// structural, not numeric.
class SparseCsc {
 public:
  SparseCsc() = default;
  /// Validates the CSC invariants; throws ModelError when violated.
  SparseCsc(Index nrow, Index ncol, std::vector<Index> col_ptr, std::vector<Index> row_idx,
            std::vector<double> values);

  /// Duplicate (row, col) entries are summed.
  static SparseCsc from_triplets(Index nrow, Index ncol, std::span<const Triplet> entries);
  static SparseCsc identity(Index n);
  /// Entries with |x| > drop_below become nonzeros (drop_below < 0 keeps all).
  static SparseCsc from_dense(const Eigen::MatrixXd& dense, double drop_below = 0.0);

  Index nrow() const { return nrow_; }
  Index ncol() const { return ncol_; }
  Index nnz() const { return static_cast<Index>(row_idx_.size()); }

  const std::vector<Index>& col_ptr() const { return col_ptr_; }
  const std::vector<Index>& row_idx() const { return row_idx_; }
  const std::vector<double>& values() const { return values_; }
  /// Mutable view of the values; the pattern stays fixed.
  std::span<double> values_mut() { return values_; }

  /// Value at (i, j); 0 for entries outside the pattern.
  double coeff(Index i, Index j) const;
  /// Position of (i, j) in values(), or -1.
  Index find(Index i, Index j) const;

  bool same_pattern(const SparseCsc& other) const {
    return nrow_ == other.nrow_ && ncol_ == other.ncol_ && col_ptr_ == other.col_ptr_ &&
           row_idx_ == other.row_idx_;
  }

  Eigen::MatrixXd to_dense() const;

 private:
  Index nrow_ = 0;
  Index ncol_ = 0;
  std::vector<Index> col_ptr_{0};
  std::vector<Index> row_idx_;
  std::vector<double> values_;
};

SparseCsc transpose(const SparseCsc& a);

/// Sparse product with a structural result pattern (no cancellation drop).
SparseCsc multiply(const SparseCsc& a, const SparseCsc& b);
Eigen::MatrixXd multiply(const SparseCsc& a, const Eigen::MatrixXd& b);
Eigen::VectorXd multiply(const SparseCsc& a, const Eigen::VectorXd& x);
/// aᵀ x without forming the transpose.
Eigen::VectorXd multiply_transposed(const SparseCsc& a, const Eigen::VectorXd& x);
/// aᵀ b for dense b.
Eigen::MatrixXd multiply_transposed(const SparseCsc& a, const Eigen::MatrixXd& b);

/// aᵀa, stored as its lower triangle.
SparseCsc crossprod(const SparseCsc& a);
/// a aᵀ, stored as its lower triangle.
SparseCsc tcrossprod(const SparseCsc& a);

/// Entries with row >= col.
SparseCsc lower_triangle(const SparseCsc& a);

/// Scales column j by s[j].
SparseCsc scale_columns(const SparseCsc& a, std::span<const double> s);

/// Vertical concatenation [top; bottom] (same column count).
SparseCsc vstack(const SparseCsc& top, const SparseCsc& bottom);

/// MatrixMarket "coordinate real general" text, 1-based indices.
std::string to_matrix_market(const SparseCsc& a);

}  // namespace lmm
