#include "lmm/data_table.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "lmm/error.hpp"

namespace lmm {

Column Column::numeric(std::string name, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.kind = Kind::Numeric;
  c.numbers = std::move(values);
  return c;
}

Column Column::categorical(std::string name, const std::vector<std::optional<std::string>>& values) {
  Column c;
  c.name = std::move(name);
  c.kind = Kind::Categorical;
  c.codes.reserve(values.size());
  std::unordered_map<std::string, int> index;
  for (const auto& v : values) {
    if (!v) {
      c.codes.push_back(-1);
      continue;
    }
    auto [it, inserted] = index.try_emplace(*v, static_cast<int>(c.levels.size()));
    if (inserted) c.levels.push_back(*v);
    c.codes.push_back(it->second);
  }
  return c;
}

Column Column::categorical(std::string name, const std::vector<std::string>& values) {
  std::vector<std::optional<std::string>> opt(values.begin(), values.end());
  return categorical(std::move(name), opt);
}

std::string Column::cell_text(std::size_t row) const {
  if (is_na(row)) return "NA";
  if (!is_numeric()) return levels[codes[row]];
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, numbers[row]);
  return std::string(buf, res.ptr);
}

void DataTable::add(Column column) {
  if (has(column.name)) throw ModelError("modelbuild", "duplicate column '" + column.name + "'");
  if (!columns_.empty() && column.size() != nrow_) {
    throw ModelError("modelbuild", "column '" + column.name + "' has " + std::to_string(column.size()) +
                                       " rows, expected " + std::to_string(nrow_));
  }
  if (columns_.empty()) nrow_ = column.size();
  columns_.push_back(std::move(column));
}

const Column* DataTable::find(const std::string& name) const {
  auto it = std::find_if(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
  return it == columns_.end() ? nullptr : &*it;
}

const Column& DataTable::at(const std::string& name) const {
  const Column* c = find(name);
  if (!c) throw ModelError("modelbuild", "unknown column '" + name + "'");
  return *c;
}

DataTable DataTable::select_rows(const std::vector<std::size_t>& rows) const {
  DataTable out;
  for (const auto& c : columns_) {
    Column nc;
    nc.name = c.name;
    nc.kind = c.kind;
    nc.levels = c.levels;
    if (c.is_numeric()) {
      nc.numbers.reserve(rows.size());
      for (auto r : rows) nc.numbers.push_back(c.numbers[r]);
    } else {
      nc.codes.reserve(rows.size());
      for (auto r : rows) nc.codes.push_back(c.codes[r]);
    }
    out.columns_.push_back(std::move(nc));
  }
  out.nrow_ = rows.size();
  return out;
}

}  // namespace lmm
