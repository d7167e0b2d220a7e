#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmm/fit.hpp"
#include "lmm/inference.hpp"

namespace lmm {

struct BootOptions {
  Index nsim = 0;
  std::uint64_t seed = 0;
  Index workers = 1;
};

struct BootResult {
  Index nsim = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> names;  ///< model_params order: sd/cor, sigma, β
  std::vector<Index> replicate;    ///< 0-based index of each successful replicate
  Eigen::MatrixXd draws;           ///< one row per successful replicate
  Index failures = 0;
};

/// Simulates nsim responses from the fit (new spherical effects, stream
/// (seed, i) for replicate i) and refits each from θ̂. Replicates that fail
/// to refit are counted and left out. Results do not depend on `workers`.
BootResult bootstrap(const FitResult& fit, const BootOptions& options);

/// Percentile intervals (type-7 quantiles, NaN draws ignored).
std::vector<Interval> confint_boot(const BootResult& boot, double level = 0.95);

}  // namespace lmm
