#include "lmm/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmm/error.hpp"

namespace lmm {

MonotoneSpline::MonotoneSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw ModelError("inference", "interpolation needs at least two points");
  for (std::size_t k = 1; k < n; ++k)
    if (!(x_[k] > x_[k - 1])) throw ModelError("inference", "interpolation abscissae must increase strictly");

  std::vector<double> d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
  m_.assign(n, 0.0);
  m_[0] = d[0];
  m_[n - 1] = d[n - 2];
  for (std::size_t k = 1; k + 1 < n; ++k) m_[k] = d[k - 1] * d[k] > 0.0 ? 0.5 * (d[k - 1] + d[k]) : 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (d[k] == 0.0) {
      m_[k] = m_[k + 1] = 0.0;
      continue;
    }
    const double a = m_[k] / d[k];
    const double b = m_[k + 1] / d[k];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      m_[k] = tau * a * d[k];
      m_[k + 1] = tau * b * d[k];
    }
  }
}

double MonotoneSpline::operator()(double x) const {
  if (x_.empty() || !(x >= x_.front() && x <= x_.back())) return std::numeric_limits<double>::quiet_NaN();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  k = std::clamp<std::size_t>(k, 1, x_.size() - 1) - 1;
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
         (t3 - t2) * h * m_[k + 1];
}

}  // namespace lmm
