#include <doctest.h>

#include <cmath>
#include <random>

#include "lmm/cholesky.hpp"
#include "lmm/error.hpp"

using namespace lmm;

namespace {

// Random sparse symmetric A = BBᵀ (PSD), returned as its lower triangle.
SparseCsc random_psd_lower(std::mt19937_64& rng, Index n, double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  std::vector<Triplet> t;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i == j || u(rng) < density) t.push_back({i, j, z(rng)});
  return tcrossprod(SparseCsc::from_triplets(n, n, t));
}

Eigen::MatrixXd full_from_lower(const SparseCsc& lower) {
  Eigen::MatrixXd d = lower.to_dense();
  return Eigen::MatrixXd(d.selfadjointView<Eigen::Lower>());
}

Eigen::MatrixXd perm_matrix(const std::vector<Index>& p) {
  const Index n = static_cast<Index>(p.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index k = 0; k < n; ++k) m(k, p[k]) = 1.0;
  return m;
}

SparseCsc arrow_lower(Index n, Index hub) {
  std::vector<Triplet> t;
  for (Index j = 0; j < n; ++j) t.push_back({j, j, static_cast<double>(n)});
  for (Index j = 0; j < n; ++j)
    if (j != hub) t.push_back({std::max(j, hub), std::min(j, hub), 1.0});
  return SparseCsc::from_triplets(n, n, t);
}

}  // namespace

TEST_CASE("diagonal pattern has no fill") {
  const auto a = SparseCsc::identity(5);
  auto f = CholFactor::analyze(a);
  CHECK(f.factor().nnz() == 5);
  for (Index k = 0; k < 5; ++k) CHECK(f.etree()[k] == -1);
}

TEST_CASE("arrow matrix with dense last row") {
  const auto a = arrow_lower(5, 4);
  auto f = CholFactor::analyze(a);
  CHECK(f.factor().nnz() == 9);
  for (Index j = 0; j < 4; ++j) CHECK(f.factor().find(4, j) >= 0);

  // Dense first row fills the whole factor in natural order; AMD moves the hub last.
  const auto b = arrow_lower(5, 0);
  CHECK(CholFactor::analyze(b).factor().nnz() == 15);
  auto g = CholFactor::analyze(b, Ordering::Amd);
  CHECK(g.perm().back() == 0);
  CHECK(g.factor().nnz() == 9);
  g.factorize(b, 0.0);
  const Eigen::MatrixXd l = g.factor().to_dense();
  const Eigen::MatrixXd p = perm_matrix(g.perm());
  CHECK((l * l.transpose() - p * full_from_lower(b) * p.transpose()).norm() < 1e-12);
}

TEST_CASE("block diagonal pattern stays block diagonal") {
  std::vector<Triplet> t;
  for (Index blk = 0; blk < 3; ++blk)
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j <= i; ++j) t.push_back({2 * blk + i, 2 * blk + j, i == j ? 2.0 : 0.5});
  const auto a = SparseCsc::from_triplets(6, 6, t);
  auto f = CholFactor::analyze(a);
  CHECK(f.factor().same_pattern(a));
}

TEST_CASE("zero matrix with unit shift factors to identity") {
  const SparseCsc zero(3, 3, {0, 1, 2, 3}, {0, 1, 2}, {0.0, 0.0, 0.0});
  auto f = CholFactor::analyze(zero);
  f.factorize(zero, 1.0);
  CHECK(f.factor().to_dense() == Eigen::MatrixXd::Identity(3, 3));
  CHECK(f.logdet2() == 0.0);
  Eigen::VectorXd b(3);
  b << 1, 2, 3;
  CHECK(f.solve(SolveMode::L, b) == b);
  CHECK(f.solve(SolveMode::Lt, b) == b);
}

TEST_CASE("singular matrix without shift is a pivot failure") {
  const SparseCsc a(2, 2, {0, 2, 3}, {0, 1, 1}, {1.0, 1.0, 1.0});
  auto f = CholFactor::analyze(a);
  CHECK_THROWS_AS(f.factorize(a, 0.0), PivotError);
  try {
    f.factorize(a, 0.0);
  } catch (const PivotError& e) {
    CHECK(e.column() == 1);
  }
  CHECK_FALSE(f.factorized());
  CHECK_NOTHROW(f.factorize(a, 1.0));
}

TEST_CASE("solves require a factor") {
  const auto a = SparseCsc::identity(2);
  auto f = CholFactor::analyze(a);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(f.solve(SolveMode::L, x), ModelError);
  CHECK(f.solve(SolveMode::Pt, f.solve(SolveMode::P, x)) == x);
}

TEST_CASE("diag(2,3) log determinant") {
  const SparseCsc a(2, 2, {0, 1, 2}, {0, 1}, {4.0, 9.0});
  auto f = CholFactor::analyze(a);
  f.factorize(a);
  CHECK(f.logdet2() == doctest::Approx(2.0 * (std::log(2.0) + std::log(3.0))).epsilon(1e-14));
}

TEST_CASE("entries outside the analyzed pattern are rejected") {
  const auto a = SparseCsc::identity(3);
  auto f = CholFactor::analyze(a);
  const SparseCsc b(3, 3, {0, 2, 3, 4}, {0, 2, 1, 2}, {2.0, 1.0, 2.0, 2.0});
  CHECK_THROWS_AS(f.factorize(b, 0.0), ModelError);
  // A subset of the pattern is fine.
  const SparseCsc c(3, 3, {0, 1, 1, 2}, {0, 2}, {2.0, 2.0});
  CHECK_NOTHROW(f.factorize(c, 1.0));
}

TEST_CASE("property: reconstruction over 200 random systems") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 50);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = dim(rng);
    const auto a = random_psd_lower(rng, n, 2.0 / n);
    auto f = CholFactor::analyze(a, rep % 2 ? Ordering::Amd : Ordering::Natural);
    f.factorize(a, 1.0);
    const Eigen::MatrixXd l = f.factor().to_dense();
    const Eigen::MatrixXd p = perm_matrix(f.perm());
    const Eigen::MatrixXd api = full_from_lower(a) + Eigen::MatrixXd::Identity(n, n);
    const double err = (l * l.transpose() - p * api * p.transpose()).norm() / api.norm();
    worst = std::max(worst, err);

    const Eigen::VectorXd b = Eigen::VectorXd::Random(n);
    const Eigen::VectorXd x = f.solve_system(b);
    CHECK((api * x - b).lpNorm<Eigen::Infinity>() / b.lpNorm<Eigen::Infinity>() < 1e-10);

    const double dense_logdet = 2.0 * Eigen::LLT<Eigen::MatrixXd>(api).matrixL().toDenseMatrix().diagonal().array().log().sum();
    CHECK(std::abs(f.logdet2() - dense_logdet) <= 1e-10 * std::max(1.0, std::abs(dense_logdet)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("8x8 and 6x6 dense oracles") {
  std::mt19937_64 rng(99);
  const auto a = random_psd_lower(rng, 8, 0.3);
  auto f = CholFactor::analyze(a);
  f.factorize(a, 1.0);
  const Eigen::MatrixXd api = full_from_lower(a) + Eigen::MatrixXd::Identity(8, 8);
  const Eigen::MatrixXd dense_l = Eigen::LLT<Eigen::MatrixXd>(api).matrixL();
  CHECK((f.factor().to_dense() - dense_l).norm() < 1e-12 * api.norm());

  const auto c = random_psd_lower(rng, 6, 0.4);
  auto g = CholFactor::analyze(c, Ordering::Amd);
  g.factorize(c, 1.0);
  const Eigen::MatrixXd cpi = full_from_lower(c) + Eigen::MatrixXd::Identity(6, 6);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Random(6);
  Eigen::VectorXd x = rhs;
  for (auto mode : {SolveMode::P, SolveMode::L, SolveMode::Lt, SolveMode::Pt}) x = g.solve(mode, x);
  CHECK((x - cpi.ldlt().solve(rhs)).norm() < 1e-10);
}

TEST_CASE("property: numeric updates never change the symbolic pattern") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  std::vector<Triplet> t;
  for (Index j = 0; j < 30; ++j)
    for (Index i = 0; i < 30; ++i)
      if (i == j || u(rng) < 0.1) t.push_back({i, j, 1.0});
  SparseCsc b = SparseCsc::from_triplets(30, 30, t);
  auto f = CholFactor::analyze(tcrossprod(b));
  const auto* ptr_before = f.factor().row_idx().data();
  const auto pattern_before = f.factor().row_idx();
  for (int rep = 0; rep < 100; ++rep) {
    for (auto& v : b.values_mut()) v = z(rng);
    f.factorize(tcrossprod(b), 1.0);
    CHECK(f.factor().row_idx().data() == ptr_before);
  }
  CHECK(f.factor().row_idx() == pattern_before);
}
