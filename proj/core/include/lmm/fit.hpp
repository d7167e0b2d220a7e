#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "lmm/cholesky.hpp"
#include "lmm/data_table.hpp"
#include "lmm/model_spec.hpp"
#include "lmm/optim.hpp"
#include "lmm/pls.hpp"

namespace lmm {

struct FitOptions {
  OptOptions opt;
  Ordering ordering = Ordering::Natural;
  std::optional<Eigen::VectorXd> start;  ///< initial θ instead of θ₀
};

/// A converged fit. `state` holds the PLS quantities evaluated at θ̂ and is
/// only read after construction, so a FitResult can be shared across threads.
struct FitResult {
  std::shared_ptr<const ModelSpec> spec;
  DevState state;
  OptResult opt;
  FitOptions options;
  double criterion = 0.0;  ///< REML criterion or ML deviance at θ̂

  bool reml() const { return state.reml(); }
  const Eigen::VectorXd& theta() const { return state.theta(); }
  const Eigen::VectorXd& beta() const { return state.beta(); }
  const Eigen::VectorXd& u() const { return state.u(); }
  const Eigen::VectorXd& b() const { return state.b(); }
  double sigma2() const { return state.sigma2(); }
  double sigma() const { return std::sqrt(state.sigma2()); }

  /// p + m + 1.
  Index df() const { return spec->p() + spec->m() + 1; }
  double loglik() const { return -0.5 * criterion; }
  double deviance() const { return criterion; }
  double aic() const { return criterion + 2.0 * static_cast<double>(df()); }
  double bic() const { return criterion + static_cast<double>(df()) * std::log(static_cast<double>(spec->n())); }
};

/// Optimizes the criterion of `spec` from θ₀ (or options.start).
FitResult fit_model(std::shared_ptr<const ModelSpec> spec, const FitOptions& options = {});

/// Convenience: parse, build and fit.
FitResult fit_model(const std::string& formula, const DataTable& data, const BuildOptions& build = {},
                    const FitOptions& options = {});

/// One last evaluation at opt.theta; caches everything inference needs.
FitResult finalize_fit(DevState state, OptResult opt, const FitOptions& options);

/// Same model, new response; re-optimizes from θ̂ with the existing
/// symbolic factorization.
FitResult refit(const FitResult& fit, const Eigen::VectorXd& y);

/// The ML fit of the same model (a copy when `fit` is already ML).
FitResult refit_ml(const FitResult& fit);

/// Applies `update` (e.g. ". ~ . - (Days|Subject) + (1|Subject)") to the
/// formula of `fit` and rebuilds the model from `data`.
FitResult update_fit(const FitResult& fit, const std::string& update, const DataTable& data);

}  // namespace lmm
