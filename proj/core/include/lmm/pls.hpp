#pragma once

#include <memory>

#include <Eigen/Dense>

#include "lmm/cholesky.hpp"
#include "lmm/model_spec.hpp"
#include "lmm/sparse.hpp"

namespace lmm {

/// Penalized least squares state for one model. Maps θ to the profiled
/// deviance (ML) or the profiled REML criterion. The weighted cross-products
/// are formed once; the Cholesky pattern is analyzed once and only its
/// values change between evaluations.
///
/// The four steps must run in order; evaluate() runs all of them.
class DevState {
 public:
  explicit DevState(std::shared_ptr<const ModelSpec> spec, Ordering ordering = Ordering::Natural);

  const ModelSpec& spec() const { return *spec_; }
  std::shared_ptr<const ModelSpec> spec_ptr() const { return spec_; }

  bool reml() const { return reml_; }
  void set_reml(bool reml);
  /// Replaces the response, keeping every structure (and the symbolic factor).
  void set_response(const Eigen::VectorXd& y);
  const Eigen::VectorXd& response() const { return y_; }

  /// Step I: Λᵀ ← θ[Lind], factor P(ΛᵀZᵀWZΛ + I)Pᵀ = LLᵀ.
  void update_lambda(const Eigen::VectorXd& theta);
  /// Step II: cu, RZX, RXᵀRX, β and u from the normal equations.
  void solve();
  /// Step III: μ = ZΛu + Xβ + o and W^{1/2}(y − μ).
  void update_mu();
  /// Step IV: profiled criterion from pwrss and the log-determinants.
  double criterion();

  double evaluate(const Eigen::VectorXd& theta);

  /// −2 log-likelihood with σ held at `sigma` instead of its profiled
  /// estimate (β and u still at their conditional optimum). Needs step III.
  double fixed_sigma_deviance(double sigma);

  /// Gradient of the criterion at θ (diagnostic; dense inner algebra).
  /// Throws NumericError when a diagonal θ component is 0.
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta);

  // State after the corresponding steps.
  const Eigen::VectorXd& theta() const { return theta_; }
  const SparseCsc& lambdat() const { return lambdat_; }
  const CholFactor& factor() const { return chol_; }
  const Eigen::VectorXd& cu() const { return cu_; }
  const Eigen::MatrixXd& RZX() const { return rzx_; }
  const Eigen::MatrixXd& RXtRX() const { return rxtrx_; }
  /// Upper-triangular RX with RXᵀRX = XᵀWX − RZXᵀRZX.
  const Eigen::MatrixXd& RX() const { return rx_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& u() const { return u_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& wtres() const { return wtres_; }
  double pwrss() const { return pwrss_; }
  double sqr_u() const { return u_.squaredNorm(); }
  double ldL2() const { return ld_l2_; }
  double ldRX2() const { return ld_rx2_; }
  double log_det_w() const { return log_det_w_; }
  double deg_free() const;
  double sigma2() const { return pwrss_ / deg_free(); }

  /// Constant cross-products.
  const SparseCsc& zt_sqrtw() const { return zt_sqrtw_; }
  const Eigen::VectorXd& ZtWy() const { return ztwy_; }
  const Eigen::MatrixXd& ZtWX() const { return ztwx_; }
  const Eigen::MatrixXd& XtWX() const { return xtwx_; }
  const Eigen::VectorXd& XtWy() const { return xtwy_; }

 private:
  enum class Stage { Fresh, Lambda, Solved, Mu, Done };
  void require(Stage at_least, const char* step) const;
  SparseCsc lambdat_zt_sqrtw() const;

  std::shared_ptr<const ModelSpec> spec_;
  bool reml_;
  Eigen::VectorXd y_;
  Stage stage_ = Stage::Fresh;

  SparseCsc zt_sqrtw_;
  Eigen::VectorXd ztwy_;
  Eigen::MatrixXd ztwx_;
  Eigen::MatrixXd xtwx_;
  Eigen::VectorXd xtwy_;
  double log_det_w_ = 0.0;

  Eigen::VectorXd theta_;
  SparseCsc lambdat_;
  CholFactor chol_;
  Eigen::VectorXd cu_;
  Eigen::MatrixXd rzx_;
  Eigen::MatrixXd rxtrx_;
  Eigen::MatrixXd rx_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd u_;
  Eigen::VectorXd b_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd wtres_;
  double pwrss_ = 0.0;
  double ld_l2_ = 0.0;
  double ld_rx2_ = 0.0;
};

}  // namespace lmm
