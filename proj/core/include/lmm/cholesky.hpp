#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lmm/sparse.hpp"

namespace lmm {

enum class Ordering { Natural, Amd };

enum class SolveMode {
  P,   ///< x <- P x
  L,   ///< x <- L⁻¹ x
  Lt,  ///< x <- L⁻ᵀ x
  Pt,  ///< x <- Pᵀ x
};

/// Simplicial Cholesky factor P(A + shift·I)Pᵀ = LLᵀ of a symmetric matrix
/// given by its lower triangle. The symbolic analysis (ordering, elimination
/// tree, pattern of L) is done once; numeric updates refill the values of L
/// in place and require the input pattern to be contained in the analyzed
/// one.
class CholFactor {
 public:
  CholFactor() = default;

  static CholFactor analyze(const SparseCsc& a_lower, Ordering ordering = Ordering::Natural);
  /// `perm[k]` is the original index placed at position k.
  static CholFactor analyze(const SparseCsc& a_lower, std::vector<Index> perm);

  /// Throws PivotError when a pivot is not safely positive.
  void factorize(const SparseCsc& a_lower, double shift = 0.0);

  Index size() const { return n_; }
  bool factorized() const { return factorized_; }
  const std::vector<Index>& perm() const { return perm_; }
  const std::vector<Index>& inverse_perm() const { return pinv_; }
  const std::vector<Index>& etree() const { return parent_; }
  /// Lower triangular factor; the diagonal is the first entry of each column.
  const SparseCsc& factor() const { return l_; }

  void solve_in_place(SolveMode mode, std::span<double> x) const;
  void solve_in_place(SolveMode mode, Eigen::MatrixXd& x) const;
  Eigen::VectorXd solve(SolveMode mode, Eigen::VectorXd x) const;

  /// Solves (A + shift·I) x = b.
  Eigen::VectorXd solve_system(const Eigen::VectorXd& b) const;

  /// log det(LLᵀ) = 2 Σ log L_kk.
  double logdet2() const;

 private:
  void map_input(const SparseCsc& a_lower);

  Index n_ = 0;
  bool factorized_ = false;
  std::vector<Index> perm_;
  std::vector<Index> pinv_;
  std::vector<Index> parent_;
  // Upper triangle of C = PAPᵀ; diagonal always present.
  std::vector<Index> c_ptr_;
  std::vector<Index> c_idx_;
  std::vector<double> c_val_;
  // Analyzed input pattern (lower triangle of A) and its map into C.
  std::vector<Index> a_ptr_;
  std::vector<Index> a_idx_;
  std::vector<Index> a_to_c_;
  // Row patterns of L (strictly lower part), topologically ordered.
  std::vector<Index> row_ptr_;
  std::vector<Index> row_nodes_;
  SparseCsc l_;
};

}  // namespace lmm
