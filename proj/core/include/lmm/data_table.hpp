#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace lmm {

/// One column of a DataTable. Numeric columns mark NA with NaN; categorical
/// columns store level codes (-1 for NA) into `levels`.
struct Column {
  enum class Kind { Numeric, Categorical };

  std::string name;
  Kind kind = Kind::Numeric;
  std::vector<double> numbers;
  std::vector<int> codes;
  std::vector<std::string> levels;

  static Column numeric(std::string name, std::vector<double> values);
  /// Levels are the distinct non-NA values in order of first appearance.
  /// std::nullopt marks NA.
  static Column categorical(std::string name, const std::vector<std::optional<std::string>>& values);
  static Column categorical(std::string name, const std::vector<std::string>& values);

  bool is_numeric() const { return kind == Kind::Numeric; }
  std::size_t size() const { return is_numeric() ? numbers.size() : codes.size(); }
  bool is_na(std::size_t row) const {
    return is_numeric() ? std::isnan(numbers[row]) : codes[row] < 0;
  }
  /// Text of a cell (levels for categorical, shortest decimal for numeric).
  std::string cell_text(std::size_t row) const;
};

/// Named, equal-length columns.
class DataTable {
 public:
  DataTable() = default;

  /// Throws ModelError on duplicate names or length mismatch.
  void add(Column column);

  std::size_t nrow() const { return nrow_; }
  std::size_t ncol() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  bool has(const std::string& name) const { return find(name) != nullptr; }
  const Column* find(const std::string& name) const;
  /// Throws ModelError("unknown column ...") when absent.
  const Column& at(const std::string& name) const;

  /// Keeps only the rows whose index appears in `rows` (in that order).
  DataTable select_rows(const std::vector<std::size_t>& rows) const;

 private:
  std::vector<Column> columns_;
  std::size_t nrow_ = 0;
};

}  // namespace lmm
