#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lmm/cholesky.hpp"
#include "lmm/inference.hpp"
#include "lmm/optim.hpp"

namespace lmm::cli {

enum class Command { Fit, Profile, Bootstrap, Anova, Predict, Simulate };
enum class Format { Table, Json };

struct RunConfig {
  Command command = Command::Fit;
  std::vector<std::string> formulas;  ///< anova takes one or more, the rest exactly one
  std::string data;
  std::string newdata;                ///< predict; defaults to data
  bool reml = true;
  std::string weights;
  std::string offset;
  OptOptions opt;
  Ordering ordering = Ordering::Natural;
  std::uint64_t seed = 0;
  std::optional<Index> nsim;          ///< required for bootstrap and simulate
  Index workers = 1;
  Format format = Format::Table;
  std::string out;                    ///< empty writes to the given stream
  std::vector<std::string> which;     ///< profile parameters
  double level = 0.95;
  bool population = false;            ///< predict without random effects
  SimulateMode mode = SimulateMode::NewRE;
};

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitModel = 2;

/// Executes one subcommand. The report goes to config.out when set, else to
/// `out`; errors are written to `err` as "error: <module>: <message>".
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace lmm::cli
