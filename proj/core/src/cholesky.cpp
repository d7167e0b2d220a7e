#include "lmm/cholesky.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lmm/error.hpp"

namespace lmm {
namespace {

[[noreturn]] void fail(const std::string& what) { throw ModelError("sparsela", what); }

std::vector<Index> amd_order(const SparseCsc& a_lower) {
  const Index n = a_lower.ncol();
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(2 * a_lower.nnz() + n);
  for (Index j = 0; j < n; ++j) {
    trips.emplace_back(static_cast<int>(j), static_cast<int>(j), 1.0);
    for (Index p = a_lower.col_ptr()[j]; p < a_lower.col_ptr()[j + 1]; ++p) {
      const Index i = a_lower.row_idx()[p];
      if (i <= j) continue;
      trips.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
      trips.emplace_back(static_cast<int>(j), static_cast<int>(i), 1.0);
    }
  }
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> full(n, n);
  full.setFromTriplets(trips.begin(), trips.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm;
  Eigen::AMDOrdering<int> amd;
  amd(full, perm);
  std::vector<Index> out(n);
  for (Index k = 0; k < n; ++k) out[k] = perm.indices()[k];
  return out;
}

}  // namespace

CholFactor CholFactor::analyze(const SparseCsc& a_lower, Ordering ordering) {
  if (a_lower.nrow() != a_lower.ncol()) fail("Cholesky input must be square");
  if (ordering == Ordering::Amd) return analyze(a_lower, amd_order(a_lower));
  std::vector<Index> perm(a_lower.ncol());
  std::iota(perm.begin(), perm.end(), Index{0});
  return analyze(a_lower, std::move(perm));
}

CholFactor CholFactor::analyze(const SparseCsc& a_lower, std::vector<Index> perm) {
  const Index n = a_lower.ncol();
  if (a_lower.nrow() != n) fail("Cholesky input must be square");
  if (static_cast<Index>(perm.size()) != n) fail("permutation length mismatch");

  CholFactor f;
  f.n_ = n;
  f.perm_ = std::move(perm);
  f.pinv_.assign(n, -1);
  for (Index k = 0; k < n; ++k) {
    const Index old = f.perm_[k];
    if (old < 0 || old >= n || f.pinv_[old] >= 0) fail("invalid permutation");
    f.pinv_[old] = k;
  }

  // Pattern of C = PAPᵀ (upper triangle), with the diagonal forced in.
  std::vector<Triplet> trips;
  trips.reserve(a_lower.nnz() + n);
  for (Index k = 0; k < n; ++k) trips.push_back({k, k, 0.0});
  for (Index j = 0; j < n; ++j) {
    for (Index p = a_lower.col_ptr()[j]; p < a_lower.col_ptr()[j + 1]; ++p) {
      const Index i = a_lower.row_idx()[p];
      if (i < j) continue;
      const Index pi = f.pinv_[i];
      const Index pj = f.pinv_[j];
      trips.push_back({std::min(pi, pj), std::max(pi, pj), 0.0});
    }
  }
  const SparseCsc c = SparseCsc::from_triplets(n, n, trips);
  f.c_ptr_ = c.col_ptr();
  f.c_idx_ = c.row_idx();
  f.c_val_.assign(c.nnz(), 0.0);

  // Record the analyzed input pattern (lower part only) and map it into C.
  f.a_ptr_.assign(1, 0);
  for (Index j = 0; j < n; ++j) {
    for (Index p = a_lower.col_ptr()[j]; p < a_lower.col_ptr()[j + 1]; ++p) {
      const Index i = a_lower.row_idx()[p];
      if (i < j) continue;
      f.a_idx_.push_back(i);
      const Index pi = f.pinv_[i];
      const Index pj = f.pinv_[j];
      f.a_to_c_.push_back(c.find(std::min(pi, pj), std::max(pi, pj)));
    }
    f.a_ptr_.push_back(static_cast<Index>(f.a_idx_.size()));
  }

  // Elimination tree of C.
  f.parent_.assign(n, -1);
  std::vector<Index> ancestor(n, -1);
  for (Index k = 0; k < n; ++k) {
    for (Index p = f.c_ptr_[k]; p < f.c_ptr_[k + 1]; ++p) {
      for (Index i = f.c_idx_[p]; i != -1 && i < k;) {
        const Index next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) f.parent_[i] = k;
        i = next;
      }
    }
  }

  // Row patterns of L via elimination-tree reach, topologically ordered.
  std::vector<Index> mark(n, -1);
  std::vector<Index> stack(n);
  std::vector<Index> col_count(n, 1);
  f.row_ptr_.assign(1, 0);
  for (Index k = 0; k < n; ++k) {
    mark[k] = k;
    Index top = n;
    for (Index p = f.c_ptr_[k]; p < f.c_ptr_[k + 1]; ++p) {
      Index i = f.c_idx_[p];
      if (i > k) continue;
      Index len = 0;
      for (; mark[i] != k; i = f.parent_[i]) {
        stack[len++] = i;
        mark[i] = k;
      }
      while (len > 0) stack[--top] = stack[--len];
    }
    for (Index t = top; t < n; ++t) {
      f.row_nodes_.push_back(stack[t]);
      ++col_count[stack[t]];
    }
    f.row_ptr_.push_back(static_cast<Index>(f.row_nodes_.size()));
  }

  std::vector<Index> l_ptr(n + 1, 0);
  for (Index j = 0; j < n; ++j) l_ptr[j + 1] = l_ptr[j] + col_count[j];
  std::vector<Index> l_idx(l_ptr[n]);
  std::vector<Index> next(l_ptr.begin(), l_ptr.end() - 1);
  for (Index k = 0; k < n; ++k) {
    l_idx[next[k]++] = k;
    for (Index t = f.row_ptr_[k]; t < f.row_ptr_[k + 1]; ++t) l_idx[next[f.row_nodes_[t]]++] = k;
  }
  std::vector<double> l_val(l_idx.size(), 0.0);
  f.l_ = SparseCsc(n, n, std::move(l_ptr), std::move(l_idx), std::move(l_val));
  return f;
}

void CholFactor::map_input(const SparseCsc& a) {
  if (a.nrow() != n_ || a.ncol() != n_) fail("matrix dimension differs from the analyzed pattern");
  std::fill(c_val_.begin(), c_val_.end(), 0.0);
  const auto& cp = a.col_ptr();
  const auto& ri = a.row_idx();
  const auto& v = a.values();

  bool same = true;
  {
    Index q = 0;
    for (Index j = 0; j < n_ && same; ++j) {
      for (Index p = cp[j]; p < cp[j + 1]; ++p) {
        if (ri[p] < j) continue;
        if (q >= a_ptr_[j + 1] || a_idx_[q] != ri[p]) {
          same = false;
          break;
        }
        ++q;
      }
      if (same && q != a_ptr_[j + 1]) same = false;
    }
  }
  if (same) {
    Index q = 0;
    for (Index j = 0; j < n_; ++j)
      for (Index p = cp[j]; p < cp[j + 1]; ++p)
        if (ri[p] >= j) c_val_[a_to_c_[q++]] += v[p];
    return;
  }
  for (Index j = 0; j < n_; ++j) {
    const auto first = a_idx_.begin() + a_ptr_[j];
    const auto last = a_idx_.begin() + a_ptr_[j + 1];
    for (Index p = cp[j]; p < cp[j + 1]; ++p) {
      const Index i = ri[p];
      if (i < j) continue;
      const auto it = std::lower_bound(first, last, i);
      if (it == last || *it != i) {
        if (v[p] == 0.0) continue;
        fail("entry (" + std::to_string(i) + ", " + std::to_string(j) +
             ") is outside the analyzed sparsity pattern");
      }
      c_val_[a_to_c_[it - a_idx_.begin()]] += v[p];
    }
  }
}

void CholFactor::factorize(const SparseCsc& a_lower, double shift) {
  factorized_ = false;
  map_input(a_lower);
  for (Index k = 0; k < n_; ++k) c_val_[c_ptr_[k + 1] - 1] += shift;  // diagonal is last in each upper column

  double scale = 0.0;
  for (double x : c_val_) scale = std::max(scale, std::abs(x));
  const double tol = 1e-14 * scale;

  const auto& lp = l_.col_ptr();
  const auto& li = l_.row_idx();
  auto lx = l_.values_mut();
  std::vector<double> x(n_, 0.0);
  std::vector<Index> fill(lp.begin(), lp.end() - 1);

  for (Index k = 0; k < n_; ++k) {
    for (Index p = c_ptr_[k]; p < c_ptr_[k + 1]; ++p) x[c_idx_[p]] = c_val_[p];
    double d = x[k];
    x[k] = 0.0;
    for (Index t = row_ptr_[k]; t < row_ptr_[k + 1]; ++t) {
      const Index i = row_nodes_[t];
      const double lki = x[i] / lx[lp[i]];
      x[i] = 0.0;
      for (Index p = lp[i] + 1; p < fill[i]; ++p) x[li[p]] -= lx[p] * lki;
      d -= lki * lki;
      lx[fill[i]++] = lki;
    }
    if (!(d > tol)) throw PivotError(k, d);
    lx[lp[k]] = std::sqrt(d);
    fill[k] = lp[k] + 1;
  }
  factorized_ = true;
}

void CholFactor::solve_in_place(SolveMode mode, std::span<double> x) const {
  if (static_cast<Index>(x.size()) != n_) fail("right-hand side length mismatch");
  if ((mode == SolveMode::L || mode == SolveMode::Lt) && !factorized_) fail("factor has not been computed");
  const auto& lp = l_.col_ptr();
  const auto& li = l_.row_idx();
  const auto& lx = l_.values();
  switch (mode) {
    case SolveMode::P: {
      std::vector<double> y(n_);
      for (Index k = 0; k < n_; ++k) y[k] = x[perm_[k]];
      std::copy(y.begin(), y.end(), x.begin());
      break;
    }
    case SolveMode::Pt: {
      std::vector<double> y(n_);
      for (Index k = 0; k < n_; ++k) y[perm_[k]] = x[k];
      std::copy(y.begin(), y.end(), x.begin());
      break;
    }
    case SolveMode::L:
      for (Index j = 0; j < n_; ++j) {
        x[j] /= lx[lp[j]];
        for (Index p = lp[j] + 1; p < lp[j + 1]; ++p) x[li[p]] -= lx[p] * x[j];
      }
      break;
    case SolveMode::Lt:
      for (Index j = n_ - 1; j >= 0; --j) {
        for (Index p = lp[j] + 1; p < lp[j + 1]; ++p) x[j] -= lx[p] * x[li[p]];
        x[j] /= lx[lp[j]];
      }
      break;
  }
}

void CholFactor::solve_in_place(SolveMode mode, Eigen::MatrixXd& x) const {
  if (x.rows() != n_) fail("right-hand side row count mismatch");
  for (Index c = 0; c < x.cols(); ++c) solve_in_place(mode, std::span<double>(x.col(c).data(), n_));
}

Eigen::VectorXd CholFactor::solve(SolveMode mode, Eigen::VectorXd x) const {
  solve_in_place(mode, std::span<double>(x.data(), x.size()));
  return x;
}

Eigen::VectorXd CholFactor::solve_system(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = b;
  std::span<double> s(x.data(), x.size());
  solve_in_place(SolveMode::P, s);
  solve_in_place(SolveMode::L, s);
  solve_in_place(SolveMode::Lt, s);
  solve_in_place(SolveMode::Pt, s);
  return x;
}

double CholFactor::logdet2() const {
  if (!factorized_) fail("factor has not been computed");
  double s = 0.0;
  for (Index j = 0; j < n_; ++j) s += std::log(l_.values()[l_.col_ptr()[j]]);
  return 2.0 * s;
}

}  // namespace lmm
