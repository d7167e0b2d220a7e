#include "lmm/cli/run.hpp"

#include <fstream>
#include <sstream>

#include "lmm/bootstrap.hpp"
#include "lmm/cli/csv.hpp"
#include "lmm/cli/report.hpp"
#include "lmm/profile.hpp"

namespace lmm::cli {
namespace {

const char* mode_name(SimulateMode m) {
  switch (m) {
    case SimulateMode::NewRE: return "newRE";
    case SimulateMode::UseU: return "useU";
    case SimulateMode::Population: return "population";
  }
  return "";
}

FitResult fit_one(const RunConfig& c, const std::string& formula, const DataTable& data) {
  BuildOptions b;
  b.reml = c.reml;
  b.weights = c.weights;
  b.offset = c.offset;
  FitOptions f;
  f.opt = c.opt;
  f.ordering = c.ordering;
  return fit_model(formula, data, b, f);
}

void check(const RunConfig& c) {
  if (c.formulas.empty()) throw ModelError("cli", "--formula is required");
  if (c.command != Command::Anova && c.formulas.size() != 1)
    throw ModelError("cli", "exactly one --formula expected");
  if (c.data.empty()) throw ModelError("cli", "--data is required");
  if ((c.command == Command::Bootstrap || c.command == Command::Simulate) && !c.nsim)
    throw ModelError("cli", "--nsim is required");
  if (c.nsim && *c.nsim < 0) throw ModelError("cli", "--nsim must be non-negative");
  if (c.workers < 1) throw ModelError("cli", "--workers must be at least 1");
  if (!(c.level > 0.0 && c.level < 1.0)) throw ModelError("cli", "--level must be in (0, 1)");
}

void report(const RunConfig& c, std::ostream& os) {
  const DataTable data = read_csv(c.data);
  const std::string& formula = c.formulas.front();
  const bool json = c.format == Format::Json;
  Json j;
  j["command"] = "";

  switch (c.command) {
    case Command::Fit: {
      const FitResult fit = fit_one(c, formula, data);
      if (!json) return print_fit(os, fit, c.data);
      j["command"] = "fit";
      j["fit"] = fit_json(fit, c.data);
      break;
    }
    case Command::Profile: {
      const FitResult fit = fit_one(c, formula, data);
      ProfileOptions po;
      po.which = c.which;
      po.workers = c.workers;
      po.opt = c.opt;
      const ProfileResult prof = profile(fit, po);
      if (!json) return print_profile(os, prof, c.level);
      j["command"] = "profile";
      j["formula"] = formula;
      j["profile"] = profile_json(prof, c.level);
      break;
    }
    case Command::Bootstrap: {
      const FitResult fit = fit_one(c, formula, data);
      const BootResult boot = bootstrap(fit, {*c.nsim, c.seed, c.workers});
      if (!json) return print_bootstrap(os, boot, c.level);
      j["command"] = "bootstrap";
      j["formula"] = formula;
      j["bootstrap"] = bootstrap_json(boot, c.level);
      break;
    }
    case Command::Anova: {
      std::vector<FitResult> fits;
      for (const auto& f : c.formulas) fits.push_back(fit_one(c, f, data));
      if (fits.size() == 1) {
        const auto rows = anova_seq(fits.front());
        if (!json) return print_anova(os, rows);
        j["command"] = "anova";
        j["formula"] = formula;
        j["anova"] = anova_json(rows);
      } else {
        std::vector<const FitResult*> ptrs;
        for (const auto& f : fits) ptrs.push_back(&f);
        const auto rows = anova_compare(ptrs, c.formulas);
        if (!json) return print_compare(os, rows);
        j["command"] = "anova";
        j["compare"] = compare_json(rows);
      }
      break;
    }
    case Command::Predict: {
      const FitResult fit = fit_one(c, formula, data);
      const DataTable nd = c.newdata.empty() ? data : read_csv(c.newdata);
      const Eigen::VectorXd p = predict(fit, nd, !c.population);
      if (!json) {
        os << "prediction\n";
        for (Index i = 0; i < p.size(); ++i) os << strf("%.17g", p(i)) << '\n';
        return;
      }
      j["command"] = "predict";
      j["formula"] = formula;
      j["conditional"] = !c.population;
      j["prediction"] = to_json(p);
      break;
    }
    case Command::Simulate: {
      const FitResult fit = fit_one(c, formula, data);
      const Eigen::MatrixXd sims = simulate(fit, *c.nsim, c.seed, c.mode);
      if (!json) {
        for (Index s = 0; s < sims.cols(); ++s) os << (s ? "," : "") << "sim_" << s + 1;
        os << '\n';
        for (Index i = 0; i < sims.rows(); ++i) {
          for (Index s = 0; s < sims.cols(); ++s) os << (s ? "," : "") << strf("%.17g", sims(i, s));
          os << '\n';
        }
        return;
      }
      j["command"] = "simulate";
      j["formula"] = formula;
      j["nsim"] = *c.nsim;
      j["seed"] = c.seed;
      j["mode"] = mode_name(c.mode);
      Json cols = Json::array();
      for (Index s = 0; s < sims.cols(); ++s) cols.push_back(to_json(Eigen::VectorXd(sims.col(s))));
      j["simulations"] = cols;
      break;
    }
  }
  os << j.dump(2) << '\n';
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    check(config);
    std::ostringstream buf;
    report(config, buf);
    if (config.out.empty()) {
      out << buf.str();
    } else {
      std::ofstream f(config.out, std::ios::binary);
      if (!f) throw IoError("cannot open '" + config.out + "' for writing");
      f << buf.str();
      if (!f) throw IoError("write to '" + config.out + "' failed");
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  }
}

}  // namespace lmm::cli
