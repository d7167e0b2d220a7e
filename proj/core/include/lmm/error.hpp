#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lmm {

/// Base class for every error raised by the library. The message is
/// prefixed with the name of the module that raised it ("formula: ...").
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Malformed formula text. offset() is the byte position of the problem.
class FormulaError : public Error {
 public:
  FormulaError(const std::string& what, std::size_t offset)
      : Error("formula", what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Data/formula mismatch or inconsistent model structures.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-positive pivot, singular fixed-effects block, ...
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Cholesky pivot failure; column() is the (permuted) column index.
class PivotError : public NumericError {
 public:
  PivotError(std::ptrdiff_t column, double pivot)
      : NumericError("sparsela", "non-positive pivot " + std::to_string(pivot) +
                                     " in column " + std::to_string(column)),
        column_(column) {}

  std::ptrdiff_t column() const noexcept { return column_; }

 private:
  std::ptrdiff_t column_;
};

}  // namespace lmm
