#include "lmm/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmm/distributions.hpp"
#include "lmm/error.hpp"
#include "parallel.hpp"

namespace lmm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Deviance with one parameter held fixed, minimized over the others.
class FocalDeviance {
 public:
  virtual ~FocalDeviance() = default;
  /// Updates the warm start on success; +inf when the point is infeasible.
  virtual double operator()(double value) = 0;
};

// sd/cor/σ focal parameters: the deviance at fixed σ over (sds, cors, σ).
class CovDeviance : public FocalDeviance {
 public:
  CovDeviance(const FitResult& ml, Index focal, Eigen::VectorXd phi_hat, Eigen::VectorXd lower, Eigen::VectorXd upper,
              const OptOptions& opt)
      : state_(ml.state), focal_(focal), warm_(std::move(phi_hat)), lower_(std::move(lower)),
        upper_(std::move(upper)), opt_(opt) {}

  double operator()(double value) override {
    const Index n = warm_.size();
    std::vector<Index> free;
    for (Index k = 0; k < n; ++k)
      if (k != focal_) free.push_back(k);
    Eigen::VectorXd phi = warm_;
    phi(focal_) = value;
    const auto nf = static_cast<Index>(free.size());
    Eigen::VectorXd x0(nf), lo(nf), hi(nf);
    for (Index i = 0; i < nf; ++i) {
      x0(i) = phi(free[i]);
      lo(i) = lower_(free[i]);
      hi(i) = upper_(free[i]);
    }
    const Objective f = [&](const Eigen::VectorXd& x) {
      for (Index i = 0; i < nf; ++i) phi(free[i]) = x(i);
      return eval(phi);
    };
    OptResult r;
    try {
      r = optimize(f, x0, lo, hi, opt_);
    } catch (const Error&) {
      return kInf;
    }
    for (Index i = 0; i < nf; ++i) warm_(free[i]) = r.theta(i);
    warm_(focal_) = value;
    return r.fval;
  }

  double eval(const Eigen::VectorXd& phi) {
    const ModelSpec& s = state_.spec();
    const Index m = s.m();
    const double sigma = phi(m);
    state_.update_lambda(theta_from_sdcor(s, phi.head(m), sigma));
    state_.solve();
    state_.update_mu();
    return state_.fixed_sigma_deviance(sigma);
  }

 private:
  DevState state_;
  Index focal_;
  Eigen::VectorXd warm_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  OptOptions opt_;
};

// β focal parameter: its column moves into the offset, which is the same as
// subtracting value·xⱼ from the response of the reduced model.
class BetaDeviance : public FocalDeviance {
 public:
  BetaDeviance(const FitResult& ml, Index column, const OptOptions& opt)
      : state_(reduced(*ml.spec, column), ml.options.ordering), xj_(ml.spec->X.col(column)), y_(ml.spec->y),
        warm_(ml.theta()), opt_(opt) {
    state_.set_reml(false);
  }

  double operator()(double value) override {
    state_.set_response(y_ - value * xj_);
    const Objective f = [&](const Eigen::VectorXd& theta) { return state_.evaluate(theta); };
    OptResult r;
    try {
      r = optimize(f, warm_, state_.spec().lower, opt_);
    } catch (const Error&) {
      return kInf;
    }
    warm_ = r.theta;
    return r.fval;
  }

 private:
  static std::shared_ptr<const ModelSpec> reduced(const ModelSpec& s, Index column) {
    auto r = std::make_shared<ModelSpec>(s);
    const Index p = s.p();
    Eigen::MatrixXd x(s.n(), p - 1);
    for (Index j = 0, k = 0; j < p; ++j)
      if (j != column) x.col(k++) = s.X.col(j);
    r->X = std::move(x);
    r->xnames.erase(r->xnames.begin() + column);
    r->fixed_terms.clear();
    r->reml = false;
    return r;
  }

  DevState state_;
  Eigen::VectorXd xj_;
  Eigen::VectorXd y_;
  Eigen::VectorXd warm_;
  OptOptions opt_;
};

struct Branch {
  std::vector<ProfilePoint> points;  // walk order, estimate excluded
  bool at_limit = false;
};

Branch walk(FocalDeviance& dev, double estimate, double limit, double sign, double base, double cutoff,
            Index max_points, const std::string& name) {
  Branch br;
  const double delta_zeta = cutoff / 8.0;
  const auto clamp = [&](double v) { return sign > 0 ? std::min(v, limit) : std::max(v, limit); };
  double prev_v = estimate, prev_z = 0.0;
  double step = estimate != 0.0 ? 0.01 * std::abs(estimate) : 0.001;
  double v = clamp(estimate + sign * step);
  if (v == estimate) {
    br.at_limit = true;
    return br;
  }
  const double tol = 1e-6 * (1.0 + std::abs(base));
  for (Index k = 0; k < max_points; ++k) {
    const double d = dev(v);
    if (!std::isfinite(d)) break;
    if (d < base - tol) {
      throw NumericError("inference", "profiled deviance for '" + name + "' fell below the minimum (" +
                                          std::to_string(d) + " < " + std::to_string(base) +
                                          "); the original fit may not have converged");
    }
    const double z = sign * std::sqrt(std::max(0.0, d - base));
    br.points.push_back({v, z});
    if (std::abs(z) > cutoff) break;
    if (v == limit) {
      br.at_limit = true;
      break;
    }
    const double last = std::abs(v - prev_v);
    const double slope = (z - prev_z) / (v - prev_v);
    double next = slope > 0.0 && std::isfinite(slope) ? delta_zeta / slope : 2.0 * last;
    next = std::clamp(next, 1e-3 * last, 10.0 * last);
    prev_v = v;
    prev_z = z;
    v = clamp(v + sign * next);
  }
  return br;
}

ParamProfile finish(ParamInfo info, double estimate, double lo, double hi, Branch down, Branch up) {
  ParamProfile pp;
  pp.param = std::move(info);
  pp.estimate = estimate;
  pp.lower_limit = lo;
  pp.upper_limit = hi;
  pp.stopped_at_lower = down.at_limit;
  pp.stopped_at_upper = up.at_limit;
  for (auto it = down.points.rbegin(); it != down.points.rend(); ++it) pp.points.push_back(*it);
  pp.points.push_back({estimate, 0.0});
  for (const auto& pt : up.points) pp.points.push_back(pt);
  for (std::size_t k = 1; k < pp.points.size(); ++k)
    pp.monotone = pp.monotone && pp.points[k].zeta > pp.points[k - 1].zeta;
  if (pp.monotone && pp.points.size() >= 2) {
    std::vector<double> z, v;
    for (const auto& pt : pp.points) {
      z.push_back(pt.zeta);
      v.push_back(pt.value);
    }
    pp.inverse = MonotoneSpline(std::move(z), std::move(v));
  }
  return pp;
}

}  // namespace

double ParamProfile::value_at(double zeta) const {
  if (points.empty()) return kNaN;
  if (zeta < points.front().zeta) return stopped_at_lower ? lower_limit : kNaN;
  if (zeta > points.back().zeta) return stopped_at_upper ? upper_limit : kNaN;
  if (points.size() == 1) return points.front().value;
  if (monotone) return inverse(zeta);
  // Linear interpolation at the first crossing walking out from the estimate.
  std::size_t e = 0;
  while (e < points.size() && points[e].value != estimate) ++e;
  if (zeta >= 0) {
    for (std::size_t k = e; k + 1 < points.size(); ++k) {
      const auto& a = points[k];
      const auto& b = points[k + 1];
      if (a.zeta <= zeta && zeta <= b.zeta && b.zeta > a.zeta)
        return a.value + (zeta - a.zeta) / (b.zeta - a.zeta) * (b.value - a.value);
    }
  } else {
    for (std::size_t k = e; k > 0; --k) {
      const auto& a = points[k - 1];
      const auto& b = points[k];
      if (a.zeta <= zeta && zeta <= b.zeta && b.zeta > a.zeta)
        return a.value + (zeta - a.zeta) / (b.zeta - a.zeta) * (b.value - a.value);
    }
  }
  return kNaN;
}

ProfileResult profile(const FitResult& fit, const ProfileOptions& options) {
  if (!(options.alpha_max > 0.0 && options.alpha_max < 1.0)) {
    throw ModelError("inference", "alpha_max must be in (0, 1)");
  }
  const FitResult ml = refit_ml(fit);
  const ModelSpec& s = *ml.spec;
  const std::vector<ParamInfo> params = model_params(s);
  const Index m = s.m();

  ProfileResult out;
  out.base_deviance = ml.criterion;
  out.cutoff = std::sqrt(qchisq(1.0 - options.alpha_max, static_cast<double>(params.size())));

  const double sigma = std::sqrt(ml.state.pwrss() / static_cast<double>(s.n()));
  const Eigen::VectorXd values = param_values(s, ml.theta(), sigma, ml.beta());
  Eigen::VectorXd lower(m + 1), upper(m + 1);
  for (Index k = 0; k <= m; ++k) {
    const bool cor = k < m && params[k].kind == ParamKind::Cor;
    lower(k) = cor ? -1.0 : 0.0;
    upper(k) = cor ? 1.0 : kInf;
  }

  std::vector<std::size_t> selected;
  if (options.which.empty()) {
    for (std::size_t k = 0; k < params.size(); ++k) selected.push_back(k);
  } else {
    for (const auto& name : options.which) {
      const auto it = std::find_if(params.begin(), params.end(), [&](const ParamInfo& p) { return p.name == name; });
      if (it == params.end()) throw ModelError("inference", "no parameter named '" + name + "'");
      selected.push_back(static_cast<std::size_t>(it - params.begin()));
    }
  }
  for (std::size_t idx : selected) {
    if (std::isnan(values(static_cast<Index>(idx)))) {
      throw NumericError("inference", "parameter '" + params[idx].name + "' is undefined at the estimate");
    }
  }

  std::vector<ParamProfile> results(selected.size());
  const Index ntask = static_cast<Index>(selected.size());
  detail::parallel_for(ntask, options.workers, [&](Index t, Index) {
    const std::size_t idx = selected[static_cast<std::size_t>(t)];
    const ParamInfo& info = params[idx];
    const double est = values(static_cast<Index>(idx));
    double lo = -kInf, hi = kInf;
    if (static_cast<Index>(idx) <= m) {
      lo = lower(static_cast<Index>(idx));
      hi = upper(static_cast<Index>(idx));
    }
    const auto make = [&]() -> std::unique_ptr<FocalDeviance> {
      if (info.kind == ParamKind::Beta) return std::make_unique<BetaDeviance>(ml, info.index, options.opt);
      return std::make_unique<CovDeviance>(ml, static_cast<Index>(idx), values.head(m + 1), lower, upper, options.opt);
    };
    auto dn = make();
    Branch down = walk(*dn, est, lo, -1.0, out.base_deviance, out.cutoff, options.max_points, info.name);
    auto up = make();
    Branch upb = walk(*up, est, hi, 1.0, out.base_deviance, out.cutoff, options.max_points, info.name);
    results[static_cast<std::size_t>(t)] = finish(info, est, lo, hi, std::move(down), std::move(upb));
  });
  for (auto& r : results) {
    if (!r.monotone) out.warnings.push_back("profile for '" + r.param.name + "' is not monotone; using linear interpolation");
    out.params.push_back(std::move(r));
  }
  return out;
}

std::vector<Interval> confint_profile(const ProfileResult& prof, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ModelError("inference", "confidence level must be in (0, 1)");
  const double z = qnorm(0.5 * (1.0 + level));
  std::vector<Interval> out;
  for (const auto& p : prof.params) out.push_back({p.param.name, p.value_at(-z), p.value_at(z)});
  return out;
}

}  // namespace lmm
