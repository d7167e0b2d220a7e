#pragma once

namespace lmm {

double pnorm(double x);
double qnorm(double p);
/// Lower tail P(X ≤ x) for X ~ χ²(df).
double pchisq(double x, double df);
/// Upper tail P(X > x), accurate for tiny probabilities.
double pchisq_upper(double x, double df);
double qchisq(double p, double df);

}  // namespace lmm
