#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lmm/error.hpp"
#include "lmm/pls.hpp"
#include "toys.hpp"

using namespace lmm;

namespace {

struct Built {
  std::shared_ptr<const ModelSpec> spec;
  Eigen::MatrixXd Z, X, W;
  Eigen::VectorXd y, o;
};

Built make(const std::string& formula, const DataTable& data, bool reml, bool weighted) {
  BuildOptions opt;
  opt.reml = reml;
  if (weighted) opt.weights = "w";
  Built b;
  b.spec = std::make_shared<const ModelSpec>(build_spec(formula, data, opt));
  b.Z = b.spec->Zt.to_dense().transpose();
  b.X = b.spec->X;
  b.W = b.spec->sqrtw.array().square().matrix().asDiagonal();
  b.y = b.spec->y;
  b.o = b.spec->offset;
  return b;
}

// −2 log-likelihood of y ~ N(Xβ + o, σ²(W⁻¹ + ZΛΛᵀZᵀ)); REML adds
// log|XᵀV⁻¹X| and uses n − p in the constant.
double full_m2ll(const Built& b, const Eigen::MatrixXd& lambda, const Eigen::VectorXd& beta, double s2, bool reml) {
  const Index n = b.y.size();
  const Index p = b.X.cols();
  const Eigen::MatrixXd v = s2 * (Eigen::MatrixXd(b.W.diagonal().cwiseInverse().asDiagonal()) +
                                  b.Z * lambda * lambda.transpose() * b.Z.transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(v);
  const Eigen::VectorXd r = b.y - b.o - b.X * beta;
  const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  double out = logdet + r.dot(llt.solve(r));
  const double two_pi = 2.0 * std::numbers::pi;
  if (reml) {
    const Eigen::MatrixXd xvx = b.X.transpose() * llt.solve(b.X);
    out += std::log(xvx.determinant()) + static_cast<double>(n - p) * std::log(two_pi);
  } else {
    out += static_cast<double>(n) * std::log(two_pi);
  }
  return out;
}

// Generalized least squares: β̂ and the profiled σ̂² for the scaled covariance.
std::pair<Eigen::VectorXd, double> gls(const Built& b, const Eigen::MatrixXd& lambda, bool reml) {
  const Eigen::MatrixXd vt = Eigen::MatrixXd(b.W.diagonal().cwiseInverse().asDiagonal()) +
                             b.Z * lambda * lambda.transpose() * b.Z.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(vt);
  const Eigen::VectorXd yo = b.y - b.o;
  const Eigen::VectorXd beta = (b.X.transpose() * llt.solve(b.X)).ldlt().solve(b.X.transpose() * llt.solve(yo));
  const Eigen::VectorXd r = yo - b.X * beta;
  const double df = static_cast<double>(b.y.size() - (reml ? b.X.cols() : 0));
  return {beta, r.dot(llt.solve(r)) / df};
}

}  // namespace

TEST_CASE("PLS solution satisfies the dense normal equations") {
  std::mt19937_64 gen(11);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const DataTable data = random_toy(gen, 8 + gen() % 5);
    const std::string& f = toy_formulas()[rep % toy_formulas().size()];
    const Built b = make(f, data, rep % 2 == 0, rep % 3 != 0);
    DevState st(b.spec);
    const Eigen::VectorXd theta = random_theta(*b.spec, gen);
    st.evaluate(theta);

    const Eigen::MatrixXd lam = dense_lambda(*b.spec, theta);
    const Index q = b.spec->q(), p = b.spec->p();
    const Eigen::MatrixXd zl = b.Z * lam;
    Eigen::MatrixXd a(q + p, q + p);
    a.topLeftCorner(q, q) = zl.transpose() * b.W * zl + Eigen::MatrixXd::Identity(q, q);
    a.topRightCorner(q, p) = zl.transpose() * b.W * b.X;
    a.bottomLeftCorner(p, q) = a.topRightCorner(q, p).transpose();
    a.bottomRightCorner(p, p) = b.X.transpose() * b.W * b.X;
    Eigen::VectorXd rhs(q + p);
    rhs.head(q) = zl.transpose() * b.W * (b.y - b.o);
    rhs.tail(p) = b.X.transpose() * b.W * (b.y - b.o);
    const Eigen::VectorXd sol = a.ldlt().solve(rhs);

    const double scale = 1.0 + sol.lpNorm<Eigen::Infinity>();
    CHECK((st.u() - sol.head(q)).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
    CHECK((st.beta() - sol.tail(p)).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
    CHECK((st.b() - lam * st.u()).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("profiled criterion equals the minimum of the full likelihood") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 40; ++rep) {
    const bool reml = rep % 2 == 1;
    const DataTable data = random_toy(gen, 8 + gen() % 5);
    const std::string& f = toy_formulas()[rep % toy_formulas().size()];
    const Built b = make(f, data, reml, rep % 4 < 2);
    DevState st(b.spec);
    const Eigen::VectorXd theta = random_theta(*b.spec, gen);
    const double crit = st.evaluate(theta);

    const Eigen::MatrixXd lam = dense_lambda(*b.spec, theta);
    const auto [beta, s2] = gls(b, lam, reml);
    const double best = full_m2ll(b, lam, beta, s2, reml);
    CHECK(std::abs(crit - best) < 1e-6);
    CHECK(std::abs(st.sigma2() - s2) < 1e-8 * (1.0 + s2));

    // The closed-form minimizer really is a minimum over (β, σ²).
    std::normal_distribution<double> z;
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd bp = beta;
      for (Index j = 0; j < bp.size(); ++j) bp(j) += 0.05 * z(gen);
      const double sp = s2 * std::exp(0.1 * z(gen));
      CHECK(full_m2ll(b, lam, reml ? beta : bp, sp, reml) >= best - 1e-9);
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 gen(5);
  const DataTable data = random_toy(gen, 12);
  for (bool reml : {false, true}) {
    const Built b = make("y ~ x + (x|g)", data, reml, true);
    DevState st(b.spec);
    for (int pt = 0; pt < 5; ++pt) {
      const Eigen::VectorXd theta = random_theta(*b.spec, gen, 0.3);
      const Eigen::VectorXd g = st.gradient(theta);
      double worst = 0.0;
      for (Index k = 0; k < theta.size(); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(theta(k)));
        Eigen::VectorXd tp = theta, tm = theta;
        tp(k) += h;
        tm(k) -= h;
        const double fd = (st.evaluate(tp) - st.evaluate(tm)) / (2.0 * h);
        worst = std::max(worst, std::abs(g(k) - fd) / std::max(1.0, std::abs(fd)));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("gradient refuses the boundary") {
  std::mt19937_64 gen(9);
  const Built b = make("y ~ x + (1|g)", random_toy(gen, 10), true, false);
  DevState st(b.spec);
  CHECK_THROWS_AS(st.gradient(Eigen::VectorXd::Zero(1)), NumericError);
}

TEST_CASE("theta = 0 gives a finite criterion and the least-squares beta") {
  std::mt19937_64 gen(31);
  for (const auto& f : toy_formulas()) {
    const Built b = make(f, random_toy(gen, 11), true, true);
    DevState st(b.spec);
    const double crit = st.evaluate(Eigen::VectorXd::Zero(b.spec->m()));
    CHECK(std::isfinite(crit));
    const Eigen::VectorXd ols = (b.X.transpose() * b.W * b.X).ldlt().solve(b.X.transpose() * b.W * (b.y - b.o));
    CHECK((st.beta() - ols).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(st.u().norm() < 1e-12);
    CHECK(st.b().norm() == 0.0);
    CHECK(std::abs(st.ldL2()) < 1e-12);
  }
}

TEST_CASE("steps must run in order") {
  std::mt19937_64 gen(2);
  const Built b = make("y ~ x + (1|g)", random_toy(gen, 9), true, false);
  DevState st(b.spec);
  CHECK_THROWS_AS(st.solve(), ModelError);
  CHECK_THROWS_AS(st.update_mu(), ModelError);
  st.update_lambda(Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(st.update_mu(), ModelError);
  st.solve();
  CHECK_THROWS_AS(st.criterion(), ModelError);
  st.update_mu();
  CHECK(std::isfinite(st.criterion()));
  CHECK_THROWS_AS(st.update_lambda(Eigen::VectorXd::Constant(1, -1.0)), ModelError);
  CHECK_THROWS_AS(st.update_lambda(Eigen::VectorXd::Ones(2)), ModelError);
}

TEST_CASE("rank-deficient fixed effects are reported") {
  DataTable t;
  t.add(Column::numeric("y", {1, 2, 3, 4, 5, 6}));
  t.add(Column::numeric("x", {1, 2, 3, 4, 5, 6}));
  t.add(Column::numeric("x2", {2, 4, 6, 8, 10, 12}));
  t.add(Column::categorical("g", std::vector<std::string>{"a", "a", "b", "b", "c", "c"}));
  DevState st(std::make_shared<const ModelSpec>(build_spec("y ~ x + x2 + (1|g)", t)));
  CHECK_THROWS_AS(st.evaluate(Eigen::VectorXd::Ones(1)), NumericError);
}

TEST_CASE("new response reuses the structures") {
  std::mt19937_64 gen(4);
  const DataTable data = random_toy(gen, 10);
  const Built b = make("y ~ x + (1|g)", data, false, false);
  DevState st(b.spec);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.7);
  const double c1 = st.evaluate(theta);
  const Eigen::VectorXd y2 = 2.0 * b.y;
  st.set_response(y2);
  st.evaluate(theta);
  st.set_response(b.y);
  CHECK(st.evaluate(theta) == doctest::Approx(c1).epsilon(1e-14));
  CHECK_THROWS_AS(st.set_response(Eigen::VectorXd::Zero(3)), ModelError);
}

TEST_CASE("fixed-sigma deviance agrees with the profiled deviance at sigma hat") {
  std::mt19937_64 gen(8);
  const Built b = make("y ~ x + (x|g)", random_toy(gen, 12), false, true);
  DevState st(b.spec);
  const Eigen::VectorXd theta = random_theta(*b.spec, gen);
  const double crit = st.evaluate(theta);
  const double s = std::sqrt(st.sigma2());
  CHECK(st.fixed_sigma_deviance(s) == doctest::Approx(crit).epsilon(1e-12));
  CHECK(st.fixed_sigma_deviance(1.3 * s) > crit);
  CHECK(st.fixed_sigma_deviance(0.7 * s) > crit);
}
