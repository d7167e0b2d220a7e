#include "lmm/fit.hpp"

#include "lmm/formula.hpp"

namespace lmm {
namespace {

OptResult run(DevState& state, const Eigen::VectorXd& start, const FitOptions& options) {
  const Objective f = [&state](const Eigen::VectorXd& theta) { return state.evaluate(theta); };
  return optimize(f, start, state.spec().lower, options.opt);
}

}  // namespace

FitResult fit_model(std::shared_ptr<const ModelSpec> spec, const FitOptions& options) {
  DevState state(spec, options.ordering);
  OptResult opt = run(state, options.start ? *options.start : spec->theta0, options);
  return finalize_fit(std::move(state), std::move(opt), options);
}

FitResult fit_model(const std::string& formula, const DataTable& data, const BuildOptions& build,
                    const FitOptions& options) {
  return fit_model(std::make_shared<const ModelSpec>(build_spec(formula, data, build)), options);
}

FitResult finalize_fit(DevState state, OptResult opt, const FitOptions& options) {
  const double crit = state.evaluate(opt.theta);
  auto spec = state.spec_ptr();
  return FitResult{std::move(spec), std::move(state), std::move(opt), options, crit};
}

FitResult refit(const FitResult& fit, const Eigen::VectorXd& y) {
  DevState state = fit.state;
  state.set_response(y);
  OptResult opt = run(state, fit.theta(), fit.options);
  return finalize_fit(std::move(state), std::move(opt), fit.options);
}

FitResult refit_ml(const FitResult& fit) {
  if (!fit.reml()) return fit;
  DevState state = fit.state;
  state.set_reml(false);
  OptResult opt = run(state, fit.theta(), fit.options);
  return finalize_fit(std::move(state), std::move(opt), fit.options);
}

FitResult update_fit(const FitResult& fit, const std::string& update, const DataTable& data) {
  const ModelSpec& s = *fit.spec;
  BuildOptions build;
  build.reml = fit.reml();
  build.weights = s.weights_column;
  build.offset = s.offset_column;
  const FormulaAst ast = update_formula(s.formula, update);
  return fit_model(std::make_shared<const ModelSpec>(assemble_spec(ast, data, build)), fit.options);
}

}  // namespace lmm
