#include "lmm/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmm/error.hpp"

namespace lmm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Counted {
 public:
  Counted(const Objective& f, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, Index cap, OptResult& out)
      : f_(f), lower_(lower), upper_(upper), cap_(cap), out_(out) {}

  bool exhausted() const { return out_.n_eval >= cap_; }

  double operator()(const Eigen::VectorXd& x) {
    for (Index i = 0; i < x.size(); ++i)
      if (!(x(i) >= lower_(i) && x(i) <= upper_(i))) throw ModelError("optim", "internal error: infeasible trial point");
    ++out_.n_eval;
    double v;
    try {
      v = f_(x);
    } catch (const Error&) {
      v = kInf;
    }
    if (std::isnan(v)) v = kInf;
    if (v < out_.fval) {
      out_.fval = v;
      out_.theta = x;
    }
    out_.best_trace.push_back(out_.fval);
    return v;
  }

 private:
  const Objective& f_;
  const Eigen::VectorXd& lower_;
  const Eigen::VectorXd& upper_;
  Index cap_;
  OptResult& out_;
};

struct Box {
  const Eigen::VectorXd& lower;
  const Eigen::VectorXd& upper;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

// One Nelder-Mead run from x0 (already evaluated at f0). Returns true on
// tolerance convergence, false when the evaluation cap stops it.
bool nelder_mead(Counted& eval, const Eigen::VectorXd& x0, double f0, const Box& project, const OptOptions& opt) {
  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  const Index n = x0.size();
  std::vector<Eigen::VectorXd> x(n + 1, x0);
  std::vector<double> f(n + 1, f0);
  for (Index i = 0; i < n; ++i) {
    if (eval.exhausted()) return false;
    const double h = 0.1 * std::max(1.0, std::abs(x0(i)));
    // Step away from an upper bound instead of onto it.
    x[i + 1](i) += x0(i) + h <= project.upper(i) ? h : -h;
    x[i + 1] = project(x[i + 1]);
    f[i + 1] = eval(x[i + 1]);
  }
  std::vector<Index> idx(n + 1);
  for (;;) {
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return f[a] < f[b]; });
    {
      std::vector<Eigen::VectorXd> xs(n + 1);
      std::vector<double> fs(n + 1);
      for (Index k = 0; k <= n; ++k) {
        xs[k] = x[idx[k]];
        fs[k] = f[idx[k]];
      }
      x.swap(xs);
      f.swap(fs);
    }
    if (std::isfinite(f[n])) {
      double xspread = 0.0;
      for (Index k = 1; k <= n; ++k) xspread = std::max(xspread, (x[k] - x[0]).lpNorm<Eigen::Infinity>());
      if (f[n] - f[0] < opt.ftol * (1.0 + std::abs(f[0])) && xspread < opt.xtol) return true;
    }
    if (eval.exhausted()) return false;

    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Index k = 0; k < n; ++k) c += x[k];
    c /= static_cast<double>(n);

    const Eigen::VectorXd xr = project(c + alpha * (c - x[n]));
    const double fr = eval(xr);
    if (fr < f[0]) {
      if (eval.exhausted()) {
        x[n] = xr;
        f[n] = fr;
        continue;
      }
      const Eigen::VectorXd xe = project(c + gamma * (xr - c));
      const double fe = eval(xe);
      if (fe < fr) {
        x[n] = xe;
        f[n] = fe;
      } else {
        x[n] = xr;
        f[n] = fr;
      }
      continue;
    }
    if (fr < f[n - 1]) {
      x[n] = xr;
      f[n] = fr;
      continue;
    }
    if (eval.exhausted()) continue;
    const bool outside = fr < f[n];
    const Eigen::VectorXd xc = project(outside ? Eigen::VectorXd(c + rho * (xr - c)) : Eigen::VectorXd(c + rho * (x[n] - c)));
    const double fc = eval(xc);
    if (outside ? fc <= fr : fc < f[n]) {
      x[n] = xc;
      f[n] = fc;
      continue;
    }
    for (Index k = 1; k <= n; ++k) {
      if (eval.exhausted()) break;
      x[k] = project(x[0] + sigma * (x[k] - x[0]));
      f[k] = eval(x[k]);
    }
  }
}

}  // namespace

OptResult optimize(const Objective& f, const Eigen::VectorXd& theta0, const Eigen::VectorXd& lower,
                   const OptOptions& options) {
  return optimize(f, theta0, lower, Eigen::VectorXd::Constant(theta0.size(), kInf), options);
}

OptResult optimize(const Objective& f, const Eigen::VectorXd& theta0, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper, const OptOptions& options) {
  if (lower.size() != theta0.size()) throw ModelError("optim", "lower bounds and theta0 differ in length");
  if (upper.size() != theta0.size()) throw ModelError("optim", "upper bounds and theta0 differ in length");
  for (Index i = 0; i < theta0.size(); ++i) {
    if (!(theta0(i) >= lower(i))) throw ModelError("optim", "theta0 violates its lower bound");
    if (!(theta0(i) <= upper(i))) throw ModelError("optim", "theta0 violates its upper bound");
  }

  OptResult out;
  out.fval = kInf;
  out.theta = theta0;
  double f0;
  try {
    f0 = f(theta0);
  } catch (const Error& e) {
    throw NumericError("optim", std::string("evaluation failed at the starting point: ") + e.what());
  }
  if (!std::isfinite(f0)) throw NumericError("optim", "criterion is not finite at the starting point");
  out.n_eval = 1;
  out.fval = f0;
  out.best_trace.push_back(f0);

  Counted eval(f, lower, upper, options.max_eval, out);
  const Box box{lower, upper};
  if (theta0.size() == 0) {
    out.converged = true;
  } else {
    out.converged = nelder_mead(eval, theta0, f0, box, options);
    if (out.converged && options.restart) {
      const Eigen::VectorXd start = out.theta;
      out.converged = nelder_mead(eval, start, out.fval, box, options);
    }
  }
  out.boundary.resize(out.theta.size());
  for (Index i = 0; i < out.theta.size(); ++i) out.boundary[i] = out.theta(i) == lower(i);
  return out;
}

ConvergenceReport check_convergence(const OptResult& result, const Objective& f, const Eigen::VectorXd& lower,
                                    double rel, double tol) {
  ConvergenceReport rep;
  for (Index i = 0; i < result.theta.size(); ++i) {
    const double delta = rel * std::max(1.0, std::abs(result.theta(i)));
    for (double step : {delta, -delta}) {
      Eigen::VectorXd x = result.theta;
      x(i) += step;
      if (x(i) < lower(i)) continue;
      double v;
      try {
        v = f(x);
      } catch (const Error&) {
        v = kInf;
      }
      const Probe pr{i, step, v};
      rep.probes.push_back(pr);
      if (v < result.fval - tol) rep.improving.push_back(pr);
    }
  }
  rep.ok = rep.improving.empty();
  return rep;
}

}  // namespace lmm
