#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "lmm/cli/run.hpp"

using lmm::cli::Command;
using lmm::cli::RunConfig;

namespace {

void add_common(CLI::App* sub, RunConfig& c, bool many_formulas) {
  auto* f = sub->add_option("--formula", c.formulas, many_formulas ? "model formula (repeat to compare)" : "model formula")
                ->required();
  if (!many_formulas) f->expected(1);
  sub->add_option("--data", c.data, "CSV file with a header row")->required();
  sub->add_flag("--reml,!--ml", c.reml, "REML (default) or maximum likelihood");
  sub->add_option("--weights", c.weights, "column of prior weights");
  sub->add_option("--offset", c.offset, "offset column");
  sub->add_option("--ftol", c.opt.ftol, "relative function tolerance")->capture_default_str();
  sub->add_option("--xtol", c.opt.xtol, "parameter tolerance")->capture_default_str();
  sub->add_option("--max-eval", c.opt.max_eval, "evaluation limit")->capture_default_str();
  const std::map<std::string, lmm::Ordering> orderings{{"natural", lmm::Ordering::Natural},
                                                       {"amd", lmm::Ordering::Amd}};
  sub->add_option("--ordering", c.ordering, "fill-reducing ordering")
      ->transform(CLI::CheckedTransformer(orderings, CLI::ignore_case));
  const std::map<std::string, lmm::cli::Format> formats{{"table", lmm::cli::Format::Table},
                                                        {"json", lmm::cli::Format::Json}};
  sub->add_option("--format", c.format, "table or json")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  sub->add_option("--out", c.out, "write the report to this file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear mixed-effects models from CSV data"};
  app.require_subcommand(1);
  RunConfig c;

  auto* fit = app.add_subcommand("fit", "fit a model and print its summary");
  add_common(fit, c, false);

  auto* prof = app.add_subcommand("profile", "likelihood profiles and profile intervals");
  add_common(prof, c, false);
  prof->add_option("--which", c.which, "parameter to profile (repeatable; default all)");
  prof->add_option("--workers", c.workers, "parallel workers")->capture_default_str();
  prof->add_option("--level", c.level, "confidence level")->capture_default_str();

  auto* boot = app.add_subcommand("bootstrap", "parametric bootstrap");
  add_common(boot, c, false);
  boot->add_option("--nsim", c.nsim, "number of replicates")->required();
  boot->add_option("--seed", c.seed, "random seed")->capture_default_str();
  boot->add_option("--workers", c.workers, "parallel workers")->capture_default_str();
  boot->add_option("--level", c.level, "confidence level")->capture_default_str();

  auto* anova = app.add_subcommand("anova", "sequential F table, or likelihood-ratio comparison of several models");
  add_common(anova, c, true);

  auto* pred = app.add_subcommand("predict", "predictions for new data");
  add_common(pred, c, false);
  pred->add_option("--newdata", c.newdata, "CSV with the predictor columns (default: --data)");
  pred->add_flag("--population", c.population, "leave out the random effects");

  auto* sim = app.add_subcommand("simulate", "simulate responses from the fitted model");
  add_common(sim, c, false);
  sim->add_option("--nsim", c.nsim, "number of simulations")->required();
  sim->add_option("--seed", c.seed, "random seed")->capture_default_str();
  const std::map<std::string, lmm::SimulateMode> modes{{"newre", lmm::SimulateMode::NewRE},
                                                       {"useu", lmm::SimulateMode::UseU},
                                                       {"population", lmm::SimulateMode::Population}};
  sim->add_option("--mode", c.mode, "newre, useu or population")->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lmm::cli::kExitModel;
  }

  if (fit->parsed()) c.command = Command::Fit;
  if (prof->parsed()) c.command = Command::Profile;
  if (boot->parsed()) c.command = Command::Bootstrap;
  if (anova->parsed()) c.command = Command::Anova;
  if (pred->parsed()) c.command = Command::Predict;
  if (sim->parsed()) c.command = Command::Simulate;
  return lmm::cli::run(c, std::cout, std::cerr);
}
