#include "lmm/bootstrap.hpp"

#include <optional>

#include "lmm/error.hpp"
#include "lmm/params.hpp"
#include "lmm/rng.hpp"
#include "parallel.hpp"

namespace lmm {

BootResult bootstrap(const FitResult& fit, const BootOptions& options) {
  if (options.nsim < 0) throw ModelError("inference", "nsim must be non-negative");
  BootResult out;
  out.nsim = options.nsim;
  out.seed = options.seed;
  for (const auto& p : model_params(*fit.spec)) out.names.push_back(p.name);
  const auto np = static_cast<Index>(out.names.size());

  std::vector<std::optional<Eigen::VectorXd>> rows(static_cast<std::size_t>(options.nsim));
  const Index nw = std::max<Index>(1, options.workers);
  std::vector<DevState> states(static_cast<std::size_t>(std::min(nw, std::max<Index>(options.nsim, 1))), fit.state);
  detail::parallel_for(options.nsim, nw, [&](Index i, Index w) {
    NormalStream z(stream_rng(options.seed, static_cast<std::uint64_t>(i)));
    const Eigen::VectorXd ystar = simulate_response(fit, z, SimulateMode::NewRE);
    DevState& st = states[static_cast<std::size_t>(w)];
    try {
      st.set_response(ystar);
      const Objective f = [&st](const Eigen::VectorXd& theta) { return st.evaluate(theta); };
      const OptResult r = optimize(f, fit.theta(), fit.spec->lower, fit.options.opt);
      st.evaluate(r.theta);
      rows[static_cast<std::size_t>(i)] =
          param_values(*fit.spec, r.theta, std::sqrt(st.sigma2()), st.beta());
    } catch (const Error&) {
      // Counted below.
    }
  });

  Index ok = 0;
  for (const auto& r : rows) ok += r.has_value();
  out.draws.resize(ok, np);
  Index k = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i]) {
      ++out.failures;
      continue;
    }
    out.draws.row(k++) = rows[i]->transpose();
    out.replicate.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Interval> confint_boot(const BootResult& boot, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ModelError("inference", "confidence level must be in (0, 1)");
  std::vector<Interval> out;
  for (Index j = 0; j < static_cast<Index>(boot.names.size()); ++j) {
    std::vector<double> col(boot.draws.rows());
    for (Index r = 0; r < boot.draws.rows(); ++r) col[r] = boot.draws(r, j);
    out.push_back({boot.names[j], quantile(col, 0.5 * (1.0 - level)), quantile(col, 0.5 * (1.0 + level))});
  }
  return out;
}

}  // namespace lmm
