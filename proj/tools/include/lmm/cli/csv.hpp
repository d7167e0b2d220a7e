#pragma once

#include <string>
#include <string_view>

#include "lmm/data_table.hpp"
#include "lmm/error.hpp"

namespace lmm::cli {

/// Unreadable or malformed input files.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("cli", what) {}
};

/// RFC-4180 CSV with a header row. A column is numeric when every non-empty
/// unquoted cell parses as a decimal number; a quoted cell always counts as
/// text. Empty cells and a bare NA are missing values.
DataTable parse_csv(std::string_view text);
DataTable read_csv(const std::string& path);

}  // namespace lmm::cli
