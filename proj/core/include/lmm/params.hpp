#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmm/model_spec.hpp"

namespace lmm {

enum class ParamKind { Sd, Cor, Sigma, Beta };

const char* to_string(ParamKind kind);

/// A user-facing model parameter. Covariance parameters follow the θ layout:
/// θₖ at a diagonal position of its block becomes a standard deviation, one
/// below the diagonal a correlation.
struct ParamInfo {
  std::string name;  ///< "sd_(Intercept)|Subject", "cor_Days.(Intercept)|Subject", "sigma", "Days"
  ParamKind kind = ParamKind::Sd;
  Index index = 0;   ///< θ index for sd/cor, column of X for β
  Index block = -1;  ///< covariance block for sd/cor
  Index row = 0;
  Index col = 0;
};

/// Covariance parameters (one per θ component), then sigma, then β.
/// Throws ModelError when a covariance block is neither full lower
/// triangular nor diagonal, or a θ component belongs to no block.
std::vector<ParamInfo> model_params(const ModelSpec& spec);

/// Number of leading covariance entries in model_params (= m).
inline Index n_cov_params(const ModelSpec& spec) { return spec.m(); }

/// sd/cor values (length m) of Σ = σ²TTᵀ for the given θ. A correlation
/// involving a zero standard deviation is NaN.
Eigen::VectorXd sdcor_from_theta(const ModelSpec& spec, const Eigen::VectorXd& theta, double sigma);

/// Inverse map: T = D·chol(R)/σ per block. Throws NumericError when a
/// correlation matrix is not positive semidefinite.
Eigen::VectorXd theta_from_sdcor(const ModelSpec& spec, const Eigen::VectorXd& sdcor, double sigma);

/// All parameters of model_params at (θ, σ, β).
Eigen::VectorXd param_values(const ModelSpec& spec, const Eigen::VectorXd& theta, double sigma,
                             const Eigen::VectorXd& beta);

}  // namespace lmm
