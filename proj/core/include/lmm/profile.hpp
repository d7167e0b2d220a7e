#pragma once

#include <string>
#include <vector>

#include "lmm/fit.hpp"
#include "lmm/inference.hpp"
#include "lmm/interp.hpp"
#include "lmm/params.hpp"

namespace lmm {

struct ProfileOptions {
  double alpha_max = 0.05;
  std::vector<std::string> which;  ///< parameter names; empty selects all
  Index max_points = 100;          ///< per branch
  Index workers = 1;
  OptOptions opt;
};

struct ProfilePoint {
  double value = 0.0;
  double zeta = 0.0;
};

struct ParamProfile {
  ParamInfo param;
  double estimate = 0.0;
  std::vector<ProfilePoint> points;  ///< increasing value; includes (estimate, 0)
  double lower_limit = 0.0;          ///< admissible range of the parameter
  double upper_limit = 0.0;
  bool stopped_at_lower = false;     ///< branch hit lower_limit before the cutoff
  bool stopped_at_upper = false;
  bool monotone = true;              ///< false: linear interpolation is used
  MonotoneSpline inverse;            ///< ζ → value when monotone

  /// Parameter value where the profile reaches ζ. A branch that ended at
  /// its limit yields the limit; NaN when ζ is out of reach otherwise.
  double value_at(double zeta) const;
};

struct ProfileResult {
  double cutoff = 0.0;         ///< φ = √χ²(1 − α_max; total parameters)
  double base_deviance = 0.0;  ///< ML deviance at the optimum
  std::vector<ParamProfile> params;
  std::vector<std::string> warnings;
};

/// Likelihood profiles on the ML deviance (REML fits are refit with ML).
/// Throws NumericError when a profiled deviance falls below the optimum.
ProfileResult profile(const FitResult& fit, const ProfileOptions& options = {});

std::vector<Interval> confint_profile(const ProfileResult& prof, double level = 0.95);

}  // namespace lmm
