#pragma once

#include <string>

#include "lmm/cli/csv.hpp"

inline lmm::DataTable sleepstudy() {
  static const lmm::DataTable table = lmm::cli::read_csv(std::string(LMM_TEST_DATA_DIR) + "/sleepstudy.csv");
  return table;
}
