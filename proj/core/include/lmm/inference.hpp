#pragma once

#include <cstdint>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmm/data_table.hpp"
#include "lmm/fit.hpp"
#include "lmm/rng.hpp"

namespace lmm {

struct VarCorrBlock {
  std::string group;
  std::vector<std::string> names;
  Eigen::MatrixXd cov;  ///< σ²TTᵀ
  Eigen::VectorXd sd;
  Eigen::MatrixXd cor;  ///< NaN where an sd is zero
  std::vector<std::pair<Index, Index>> free_pairs;  ///< (row, col), row > col, with a free parameter
};

/// One row of the flat variance-component table. var2 is empty for
/// variances; grp "Residual" has empty var1 and var2.
struct VarCorrRecord {
  std::string grp;
  std::string var1;
  std::string var2;
  double vcov = 0.0;
  double sdcor = 0.0;
};

struct VarCorr {
  std::vector<VarCorrBlock> blocks;
  double residual_sd = 0.0;

  /// Per block: variances, then covariances in column order; Residual last.
  std::vector<VarCorrRecord> records() const;
};

VarCorr varcorr(const FitResult& fit);

/// σ̂²·RX⁻¹RX⁻ᵀ.
Eigen::MatrixXd vcov_fixef(const FitResult& fit);
Eigen::VectorXd se_fixef(const FitResult& fit);
Eigen::VectorXd t_values(const FitResult& fit);
Eigen::MatrixXd cor_fixef(const FitResult& fit);

struct RanefTable {
  std::string group;
  std::vector<std::string> names;
  std::vector<std::string> levels;
  Eigen::MatrixXd values;              ///< levels × names
  std::vector<Eigen::MatrixXd> cond_var;  ///< per level, filled by cond_var_ranef
};

/// Conditional modes b̂ = Λû by term and level.
std::vector<RanefTable> ranef(const FitResult& fit);

/// ranef plus the per-level blocks of σ̂²ΛVΛᵀ, V = (LLᵀ)⁻¹ in the original
/// ordering, obtained from triangular solves on the columns of Λᵀ.
std::vector<RanefTable> cond_var_ranef(const FitResult& fit);

enum class ResidualKind { Response, PearsonScaled };

Eigen::VectorXd fitted(const FitResult& fit);
Eigen::VectorXd residuals(const FitResult& fit, ResidualKind kind = ResidualKind::Response);

/// Sample quantile, type 7 (linear interpolation between order statistics).
/// NaN entries are ignored; an empty sample gives NaN.
double quantile(std::vector<double> x, double prob);

/// Blocks C_L (q×n) and C_R (p×n) with (μ − o) = [C_L; C_R]ᵀ[C_L; C_R](y − o)
/// for unit weights.
struct HatBlocks {
  Eigen::MatrixXd CL;
  Eigen::MatrixXd CR;
};
HatBlocks hat_blocks(const FitResult& fit);
double hat_trace(const FitResult& fit);
Eigen::VectorXd hat_diag(const FitResult& fit);

enum class SimulateMode { NewRE, UseU, Population };

/// One response draw: y* = Xβ̂ + o + ZΛu* + noise_scale·ε*, ε* ~ N(0, σ̂²W⁻¹).
/// Spherical effects are drawn first (NewRE only), then ε*.
Eigen::VectorXd simulate_response(const FitResult& fit, NormalStream& z, SimulateMode mode,
                                  double noise_scale = 1.0);

/// n × nsim; column s uses stream (seed, s).
Eigen::MatrixXd simulate(const FitResult& fit, Index nsim, std::uint64_t seed, SimulateMode mode,
                         double noise_scale = 1.0);

/// Xβ̂ + o (+ ZΛû with levels matched by name when conditional). Unseen
/// grouping levels are an error in conditional mode and ignored otherwise.
Eigen::VectorXd predict(const FitResult& fit, const DataTable& newdata, bool conditional = true);

struct Interval {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

/// β̂ ± z·SE for the fixed effects.
std::vector<Interval> confint_wald(const FitResult& fit, double level = 0.95);

struct AnovaRow {
  std::string term;
  Index df = 0;
  double sum_sq = 0.0;
  double mean_sq = 0.0;
  double f = 0.0;
};

/// Sequential sums of squares from the rows of RX belonging to each fixed
/// term; the intercept is left out.
std::vector<AnovaRow> anova_seq(const FitResult& fit);

struct CompareRow {
  std::string model;
  Index df = 0;
  double aic = 0.0;
  double bic = 0.0;
  double loglik = 0.0;
  double deviance = 0.0;
  double chisq = 0.0;   ///< NaN in the first row
  double chi_df = 0.0;  ///< NaN in the first row
  double p = 0.0;       ///< NaN when chi_df is not positive
};

/// Likelihood-ratio comparison. REML fits are refit with ML; rows are in
/// increasing df order (stable for ties). Every fit must use the same
/// number of observations.
std::vector<CompareRow> anova_compare(const std::vector<const FitResult*>& fits,
                                      const std::vector<std::string>& names);

}  // namespace lmm
