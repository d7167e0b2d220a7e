#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "lmm/sparse.hpp"

namespace lmm {

/// Any θ → criterion map. Throwing lmm::Error marks the point infeasible.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptOptions {
  double ftol = 1e-8;   ///< relative spread of simplex values
  double xtol = 1e-7;   ///< max coordinate distance from the best vertex
  Index max_eval = 10000;
  bool restart = true;
};

struct OptResult {
  Eigen::VectorXd theta;
  double fval = 0.0;
  Index n_eval = 0;
  bool converged = false;
  std::vector<bool> boundary;  ///< θᵢ sits at its lower bound
  std::vector<double> best_trace;  ///< best value after each evaluation
};

/// Nelder-Mead on the box θ ≥ lower with trial points projected onto the
/// box. Restarts once from the incumbent after the first convergence.
/// Throws NumericError when the objective fails at theta0.
OptResult optimize(const Objective& f, const Eigen::VectorXd& theta0, const Eigen::VectorXd& lower,
                   const OptOptions& options = {});
/// Same on the box lower ≤ θ ≤ upper.
OptResult optimize(const Objective& f, const Eigen::VectorXd& theta0, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper, const OptOptions& options = {});

struct Probe {
  Index component = 0;
  double step = 0.0;
  double fval = 0.0;
};

struct ConvergenceReport {
  bool ok = true;
  std::vector<Probe> probes;     ///< every evaluated probe
  std::vector<Probe> improving;  ///< probes better than fval by more than tol
};

/// Coordinate probes θ ± δ (δ = rel·max(1, |θᵢ|)); the downward probe is
/// skipped when it would cross the lower bound.
ConvergenceReport check_convergence(const OptResult& result, const Objective& f, const Eigen::VectorXd& lower,
                                    double rel = 1e-4, double tol = 1e-6);

}  // namespace lmm
