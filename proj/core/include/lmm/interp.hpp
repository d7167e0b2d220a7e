#pragma once

#include <vector>

namespace lmm {

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson tangents.
/// Monotone data give a monotone interpolant.
class MonotoneSpline {
 public:
  MonotoneSpline() = default;
  /// x strictly increasing, at least two points; y monotone.
  MonotoneSpline(std::vector<double> x, std::vector<double> y);

  /// NaN outside [x.front(), x.back()].
  double operator()(double x) const;

  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

}  // namespace lmm
