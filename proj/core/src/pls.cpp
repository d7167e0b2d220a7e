#include "lmm/pls.hpp"

#include <cmath>
#include <numbers>

#include "lmm/error.hpp"

namespace lmm {
namespace {

[[noreturn]] void fail(const std::string& what) { throw ModelError("pls", what); }

}  // namespace

DevState::DevState(std::shared_ptr<const ModelSpec> spec, Ordering ordering)
    : spec_(std::move(spec)), reml_(spec_->reml), y_(spec_->y) {
  const ModelSpec& s = *spec_;
  const Eigen::VectorXd& sw = s.sqrtw;
  zt_sqrtw_ = scale_columns(s.Zt, std::span<const double>(sw.data(), sw.size()));
  const Eigen::MatrixXd wx = sw.asDiagonal() * s.X;
  ztwx_ = multiply(zt_sqrtw_, wx);
  xtwx_ = wx.transpose() * wx;
  log_det_w_ = 2.0 * sw.array().log().sum();
  set_response(y_);

  theta_ = s.theta0;
  lambdat_ = s.Lambdat;
  // θ₀ has unit diagonals, so the analyzed pattern is the full structural one.
  chol_ = CholFactor::analyze(tcrossprod(lambdat_zt_sqrtw()), ordering);
}

void DevState::set_reml(bool reml) {
  reml_ = reml;
  if (stage_ == Stage::Done) stage_ = Stage::Mu;
}

void DevState::set_response(const Eigen::VectorXd& y) {
  const ModelSpec& s = *spec_;
  if (y.size() != s.n()) fail("response has length " + std::to_string(y.size()) + ", expected " + std::to_string(s.n()));
  y_ = y;
  const Eigen::VectorXd wy = s.sqrtw.cwiseProduct(y_ - s.offset);
  ztwy_ = multiply(zt_sqrtw_, wy);
  xtwy_ = (s.sqrtw.asDiagonal() * s.X).transpose() * wy;
  if (stage_ != Stage::Fresh) stage_ = Stage::Lambda;
}

SparseCsc DevState::lambdat_zt_sqrtw() const { return multiply(lambdat_, zt_sqrtw_); }

void DevState::require(Stage at_least, const char* step) const {
  if (static_cast<int>(stage_) < static_cast<int>(at_least)) {
    fail(std::string(step) + " called before the preceding PLS steps");
  }
}

double DevState::deg_free() const {
  const double n = static_cast<double>(spec_->n());
  return reml_ ? n - static_cast<double>(spec_->p()) : n;
}

void DevState::update_lambda(const Eigen::VectorXd& theta) {
  const ModelSpec& s = *spec_;
  if (theta.size() != s.m()) fail("theta has length " + std::to_string(theta.size()) + ", expected " + std::to_string(s.m()));
  for (Index k = 0; k < s.m(); ++k) {
    if (!(theta(k) >= s.lower(k))) {
      fail("theta[" + std::to_string(k + 1) + "] = " + std::to_string(theta(k)) + " is below its lower bound");
    }
  }
  stage_ = Stage::Fresh;
  theta_ = theta;
  scatter_theta(s, theta_, lambdat_);
  chol_.factorize(tcrossprod(lambdat_zt_sqrtw()), 1.0);
  stage_ = Stage::Lambda;
}

void DevState::solve() {
  require(Stage::Lambda, "solve");
  const ModelSpec& s = *spec_;
  const Index p = s.p();

  cu_ = multiply(lambdat_, ztwy_);
  chol_.solve_in_place(SolveMode::P, std::span<double>(cu_.data(), cu_.size()));
  chol_.solve_in_place(SolveMode::L, std::span<double>(cu_.data(), cu_.size()));

  rzx_ = multiply(lambdat_, ztwx_);
  chol_.solve_in_place(SolveMode::P, rzx_);
  chol_.solve_in_place(SolveMode::L, rzx_);

  rxtrx_ = xtwx_ - rzx_.transpose() * rzx_;
  Eigen::LLT<Eigen::MatrixXd> llt(rxtrx_);
  if (p > 0) {
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
      ok = d.minCoeff() > 1e-10 * std::sqrt(rxtrx_.diagonal().maxCoeff());
    }
    if (!ok) throw NumericError("pls", "RX'RX is not positive definite: fixed-effects rank deficiency or PLS failure");
  }
  rx_ = p > 0 ? Eigen::MatrixXd(llt.matrixU()) : Eigen::MatrixXd(0, 0);
  beta_ = p > 0 ? Eigen::VectorXd(llt.solve(xtwy_ - rzx_.transpose() * cu_)) : Eigen::VectorXd(0);

  u_ = cu_ - rzx_ * beta_;
  chol_.solve_in_place(SolveMode::Lt, std::span<double>(u_.data(), u_.size()));
  chol_.solve_in_place(SolveMode::Pt, std::span<double>(u_.data(), u_.size()));
  b_ = multiply_transposed(lambdat_, u_);
  ld_rx2_ = p > 0 ? 2.0 * rx_.diagonal().array().log().sum() : 0.0;
  stage_ = Stage::Solved;
}

void DevState::update_mu() {
  require(Stage::Solved, "update_mu");
  const ModelSpec& s = *spec_;
  mu_ = multiply_transposed(s.Zt, b_) + s.X * beta_ + s.offset;
  wtres_ = s.sqrtw.cwiseProduct(y_ - mu_);
  stage_ = Stage::Mu;
}

double DevState::criterion() {
  require(Stage::Mu, "criterion");
  pwrss_ = wtres_.squaredNorm() + u_.squaredNorm();
  ld_l2_ = chol_.logdet2();
  const double df = deg_free();
  double ld = ld_l2_ - log_det_w_;
  if (reml_) ld += ld_rx2_;
  stage_ = Stage::Done;
  return ld + df * (1.0 + std::log(2.0 * std::numbers::pi * pwrss_) - std::log(df));
}

double DevState::fixed_sigma_deviance(double sigma) {
  require(Stage::Mu, "fixed_sigma_deviance");
  pwrss_ = wtres_.squaredNorm() + u_.squaredNorm();
  ld_l2_ = chol_.logdet2();
  const double s2 = sigma * sigma;
  const double n = static_cast<double>(spec_->n());
  return ld_l2_ - log_det_w_ + n * std::log(2.0 * std::numbers::pi * s2) + pwrss_ / s2;
}

double DevState::evaluate(const Eigen::VectorXd& theta) {
  update_lambda(theta);
  solve();
  update_mu();
  return criterion();
}

Eigen::VectorXd DevState::gradient(const Eigen::VectorXd& theta) {
  const ModelSpec& s = *spec_;
  for (Index k = 0; k < s.m(); ++k) {
    if (s.lower(k) == 0.0 && theta(k) == 0.0) {
      throw NumericError("pls", "gradient undefined at boundary (theta[" + std::to_string(k + 1) + "] = 0)");
    }
  }
  evaluate(theta);
  const Index q = s.q();
  const Index p = s.p();
  const Eigen::MatrixXd zw = zt_sqrtw_.to_dense();   // ZᵀW^{1/2}, q×n
  const Eigen::MatrixXd wx = s.sqrtw.asDiagonal() * s.X;
  const Eigen::MatrixXd lt = lambdat_.to_dense();
  const Eigen::MatrixXd ltzw = lt * zw;

  Eigen::MatrixXd omega(q + p, q + p);
  omega.topLeftCorner(q, q) = ltzw * ltzw.transpose() + Eigen::MatrixXd::Identity(q, q);
  omega.topRightCorner(q, p) = ltzw * wx;
  omega.bottomLeftCorner(p, q) = omega.topRightCorner(q, p).transpose();
  omega.bottomRightCorner(p, p) = wx.transpose() * wx;
  const Index dim = reml_ ? q + p : q;
  const Eigen::MatrixXd omega_inv = omega.topLeftCorner(dim, dim).llt().solve(Eigen::MatrixXd::Identity(dim, dim));

  const Eigen::VectorXd res = s.sqrtw.cwiseProduct(y_ - mu_);  // W^{1/2}(y − o − ZΛu − Xβ)
  const double df = deg_free();
  Eigen::VectorXd grad(s.m());
  for (Index i = 0; i < s.m(); ++i) {
    Eigen::MatrixXd dlt = Eigen::MatrixXd::Zero(q, q);  // ∂Λᵀ/∂θᵢ
    for (Index j = 0; j < lambdat_.ncol(); ++j)
      for (Index k = lambdat_.col_ptr()[j]; k < lambdat_.col_ptr()[j + 1]; ++k)
        if (s.Lind[k] == i) dlt(lambdat_.row_idx()[k], j) = 1.0;
    const Eigen::MatrixXd dltzw = dlt * zw;
    Eigen::MatrixXd domega = Eigen::MatrixXd::Zero(dim, dim);
    const Eigen::MatrixXd cross = dltzw * ltzw.transpose();
    domega.topLeftCorner(q, q) = cross + cross.transpose();
    if (reml_) {
      domega.topRightCorner(q, p) = dltzw * wx;
      domega.bottomLeftCorner(p, q) = domega.topRightCorner(q, p).transpose();
    }
    const double trace = (omega_inv.array() * domega.array()).sum();
    const double dr2 = -2.0 * u_.dot(dltzw * res);
    grad(i) = trace + df * dr2 / pwrss_;
  }
  return grad;
}

}  // namespace lmm
