#include "lmm/sparse.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "lmm/error.hpp"

namespace lmm {
namespace {

[[noreturn]] void fail(const std::string& what) { throw ModelError("sparsela", what); }

void check_conform(Index inner_a, Index inner_b) {
  if (inner_a != inner_b) {
    fail("dimension mismatch (" + std::to_string(inner_a) + " vs " + std::to_string(inner_b) + ")");
  }
}

}  // namespace

SparseCsc::SparseCsc(Index nrow, Index ncol, std::vector<Index> col_ptr, std::vector<Index> row_idx,
                     std::vector<double> values)
    : nrow_(nrow),
      ncol_(ncol),
      col_ptr_(std::move(col_ptr)),
      row_idx_(std::move(row_idx)),
      values_(std::move(values)) {
  if (nrow_ < 0 || ncol_ < 0) fail("negative dimension");
  if (static_cast<Index>(col_ptr_.size()) != ncol_ + 1) fail("column pointer length must be ncol + 1");
  if (col_ptr_.front() != 0 || col_ptr_.back() != nnz()) fail("column pointers must span [0, nnz]");
  if (values_.size() != row_idx_.size()) fail("values and row indices differ in length");
  for (Index j = 0; j < ncol_; ++j) {
    if (col_ptr_[j + 1] < col_ptr_[j]) fail("column pointers must be nondecreasing");
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      const Index i = row_idx_[p];
      if (i < 0 || i >= nrow_) fail("row index out of range in column " + std::to_string(j));
      if (p > col_ptr_[j] && row_idx_[p - 1] >= i) {
        fail("row indices not strictly increasing in column " + std::to_string(j));
      }
    }
  }
}

SparseCsc SparseCsc::from_triplets(Index nrow, Index ncol, std::span<const Triplet> entries) {
  std::vector<Index> counts(ncol + 1, 0);
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= nrow || t.col < 0 || t.col >= ncol) fail("triplet index out of range");
    ++counts[t.col + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<Index> next(counts.begin(), counts.end() - 1);
  std::vector<std::pair<Index, double>> slots(entries.size());
  for (const auto& t : entries) slots[next[t.col]++] = {t.row, t.value};

  std::vector<Index> col_ptr(ncol + 1, 0);
  std::vector<Index> rows;
  std::vector<double> vals;
  rows.reserve(entries.size());
  vals.reserve(entries.size());
  for (Index j = 0; j < ncol; ++j) {
    auto first = slots.begin() + counts[j];
    auto last = slots.begin() + counts[j + 1];
    std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto it = first; it != last; ++it) {
      if (!rows.empty() && static_cast<Index>(rows.size()) > col_ptr[j] && rows.back() == it->first) {
        vals.back() += it->second;
      } else {
        rows.push_back(it->first);
        vals.push_back(it->second);
      }
    }
    col_ptr[j + 1] = static_cast<Index>(rows.size());
  }
  return SparseCsc(nrow, ncol, std::move(col_ptr), std::move(rows), std::move(vals));
}

SparseCsc SparseCsc::identity(Index n) {
  std::vector<Index> cp(n + 1);
  std::iota(cp.begin(), cp.end(), Index{0});
  std::vector<Index> ri(n);
  std::iota(ri.begin(), ri.end(), Index{0});
  return SparseCsc(n, n, std::move(cp), std::move(ri), std::vector<double>(n, 1.0));
}

SparseCsc SparseCsc::from_dense(const Eigen::MatrixXd& dense, double drop_below) {
  std::vector<Index> cp{0};
  std::vector<Index> ri;
  std::vector<double> v;
  for (Index j = 0; j < dense.cols(); ++j) {
    for (Index i = 0; i < dense.rows(); ++i) {
      const double x = dense(i, j);
      if (drop_below < 0 || std::abs(x) > drop_below) {
        ri.push_back(i);
        v.push_back(x);
      }
    }
    cp.push_back(static_cast<Index>(ri.size()));
  }
  return SparseCsc(dense.rows(), dense.cols(), std::move(cp), std::move(ri), std::move(v));
}

Index SparseCsc::find(Index i, Index j) const {
  const auto first = row_idx_.begin() + col_ptr_[j];
  const auto last = row_idx_.begin() + col_ptr_[j + 1];
  const auto it = std::lower_bound(first, last, i);
  if (it == last || *it != i) return -1;
  return static_cast<Index>(it - row_idx_.begin());
}

double SparseCsc::coeff(Index i, Index j) const {
  const Index p = find(i, j);
  return p < 0 ? 0.0 : values_[p];
}

Eigen::MatrixXd SparseCsc::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nrow_, ncol_);
  for (Index j = 0; j < ncol_; ++j)
    for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d(row_idx_[p], j) = values_[p];
  return d;
}

SparseCsc transpose(const SparseCsc& a) {
  const auto& cp = a.col_ptr();
  const auto& ri = a.row_idx();
  const auto& v = a.values();
  std::vector<Index> count(a.nrow() + 1, 0);
  for (Index i : ri) ++count[i + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<Index> next(count.begin(), count.end() - 1);
  std::vector<Index> rows(ri.size());
  std::vector<double> vals(ri.size());
  for (Index j = 0; j < a.ncol(); ++j) {
    for (Index p = cp[j]; p < cp[j + 1]; ++p) {
      const Index q = next[ri[p]]++;
      rows[q] = j;
      vals[q] = v[p];
    }
  }
  return SparseCsc(a.ncol(), a.nrow(), std::move(count), std::move(rows), std::move(vals));
}

SparseCsc multiply(const SparseCsc& a, const SparseCsc& b) {
  check_conform(a.ncol(), b.nrow());
  const Index m = a.nrow();
  std::vector<Index> mark(m, -1);
  std::vector<double> work(m, 0.0);
  std::vector<Index> cp{0};
  std::vector<Index> rows;
  std::vector<double> vals;
  std::vector<Index> col_rows;
  for (Index j = 0; j < b.ncol(); ++j) {
    col_rows.clear();
    for (Index pb = b.col_ptr()[j]; pb < b.col_ptr()[j + 1]; ++pb) {
      const Index k = b.row_idx()[pb];
      const double bkj = b.values()[pb];
      for (Index pa = a.col_ptr()[k]; pa < a.col_ptr()[k + 1]; ++pa) {
        const Index i = a.row_idx()[pa];
        if (mark[i] != j) {
          mark[i] = j;
          work[i] = 0.0;
          col_rows.push_back(i);
        }
        work[i] += a.values()[pa] * bkj;
      }
    }
    std::sort(col_rows.begin(), col_rows.end());
    for (Index i : col_rows) {
      rows.push_back(i);
      vals.push_back(work[i]);
    }
    cp.push_back(static_cast<Index>(rows.size()));
  }
  return SparseCsc(m, b.ncol(), std::move(cp), std::move(rows), std::move(vals));
}

Eigen::MatrixXd multiply(const SparseCsc& a, const Eigen::MatrixXd& b) {
  check_conform(a.ncol(), b.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.nrow(), b.cols());
  for (Index c = 0; c < b.cols(); ++c)
    for (Index k = 0; k < a.ncol(); ++k) {
      const double bk = b(k, c);
      if (bk == 0.0) continue;
      for (Index p = a.col_ptr()[k]; p < a.col_ptr()[k + 1]; ++p) out(a.row_idx()[p], c) += a.values()[p] * bk;
    }
  return out;
}

Eigen::VectorXd multiply(const SparseCsc& a, const Eigen::VectorXd& x) {
  check_conform(a.ncol(), x.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.nrow());
  for (Index k = 0; k < a.ncol(); ++k)
    for (Index p = a.col_ptr()[k]; p < a.col_ptr()[k + 1]; ++p) out(a.row_idx()[p]) += a.values()[p] * x(k);
  return out;
}

Eigen::VectorXd multiply_transposed(const SparseCsc& a, const Eigen::VectorXd& x) {
  check_conform(a.nrow(), x.size());
  Eigen::VectorXd out(a.ncol());
  for (Index j = 0; j < a.ncol(); ++j) {
    double s = 0.0;
    for (Index p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) s += a.values()[p] * x(a.row_idx()[p]);
    out(j) = s;
  }
  return out;
}

Eigen::MatrixXd multiply_transposed(const SparseCsc& a, const Eigen::MatrixXd& b) {
  check_conform(a.nrow(), b.rows());
  Eigen::MatrixXd out(a.ncol(), b.cols());
  for (Index c = 0; c < b.cols(); ++c)
    for (Index j = 0; j < a.ncol(); ++j) {
      double s = 0.0;
      for (Index p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) s += a.values()[p] * b(a.row_idx()[p], c);
      out(j, c) = s;
    }
  return out;
}

SparseCsc lower_triangle(const SparseCsc& a) {
  std::vector<Index> cp{0};
  std::vector<Index> rows;
  std::vector<double> vals;
  for (Index j = 0; j < a.ncol(); ++j) {
    for (Index p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) {
      if (a.row_idx()[p] >= j) {
        rows.push_back(a.row_idx()[p]);
        vals.push_back(a.values()[p]);
      }
    }
    cp.push_back(static_cast<Index>(rows.size()));
  }
  return SparseCsc(a.nrow(), a.ncol(), std::move(cp), std::move(rows), std::move(vals));
}

SparseCsc crossprod(const SparseCsc& a) { return lower_triangle(multiply(transpose(a), a)); }

SparseCsc tcrossprod(const SparseCsc& a) { return lower_triangle(multiply(a, transpose(a))); }

SparseCsc scale_columns(const SparseCsc& a, std::span<const double> s) {
  check_conform(a.ncol(), static_cast<Index>(s.size()));
  std::vector<double> vals = a.values();
  for (Index j = 0; j < a.ncol(); ++j)
    for (Index p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) vals[p] *= s[j];
  return SparseCsc(a.nrow(), a.ncol(), a.col_ptr(), a.row_idx(), std::move(vals));
}

SparseCsc vstack(const SparseCsc& top, const SparseCsc& bottom) {
  check_conform(top.ncol(), bottom.ncol());
  std::vector<Index> cp{0};
  std::vector<Index> rows;
  std::vector<double> vals;
  for (Index j = 0; j < top.ncol(); ++j) {
    for (Index p = top.col_ptr()[j]; p < top.col_ptr()[j + 1]; ++p) {
      rows.push_back(top.row_idx()[p]);
      vals.push_back(top.values()[p]);
    }
    for (Index p = bottom.col_ptr()[j]; p < bottom.col_ptr()[j + 1]; ++p) {
      rows.push_back(top.nrow() + bottom.row_idx()[p]);
      vals.push_back(bottom.values()[p]);
    }
    cp.push_back(static_cast<Index>(rows.size()));
  }
  return SparseCsc(top.nrow() + bottom.nrow(), top.ncol(), std::move(cp), std::move(rows), std::move(vals));
}

std::string to_matrix_market(const SparseCsc& a) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(a.nrow()) + " " + std::to_string(a.ncol()) + " " + std::to_string(a.nnz()) + "\n";
  char buf[64];
  for (Index j = 0; j < a.ncol(); ++j) {
    for (Index p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) {
      auto res = std::to_chars(buf, buf + sizeof buf, a.values()[p]);
      out += std::to_string(a.row_idx()[p] + 1) + " " + std::to_string(j + 1) + " " +
             std::string(buf, res.ptr) + "\n";
    }
  }
  return out;
}

}  // namespace lmm
