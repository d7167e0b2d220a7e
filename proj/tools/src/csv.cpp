#include "lmm/cli/csv.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>
#include <vector>

namespace lmm::cli {
namespace {

struct Cell {
  std::string text;
  bool quoted = false;
};

struct Record {
  std::vector<Cell> cells;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Record> split_records(std::string_view text) {
  std::vector<Record> out;
  std::size_t i = 0;
  std::size_t line = 1;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < text.size()) {
    Record rec;
    rec.line = line;
    for (;;) {
      Cell cell;
      if (i < text.size() && text[i] == '"') {
        cell.quoted = true;
        const std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= text.size()) throw IoError("unterminated quoted field starting on line " + std::to_string(open_line));
          const char c = text[i++];
          if (c == '"') {
            if (i < text.size() && text[i] == '"') {
              cell.text += '"';
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            cell.text += c;
          }
        }
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          throw IoError("unexpected character after closing quote on line " + std::to_string(line));
        }
      } else {
        const std::size_t start = i;
        while (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"') throw IoError("stray quote in unquoted field on line " + std::to_string(line));
          ++i;
        }
        cell.text = trim(text.substr(start, i - start));
      }
      rec.cells.push_back(std::move(cell));
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == '\r') ++i;
      if (i < text.size() && text[i] == '\n') ++i;
      ++line;
      break;
    }
    const bool blank = rec.cells.size() == 1 && rec.cells[0].text.empty() && !rec.cells[0].quoted;
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::string_view v(s);
  if (v.front() == '+') v.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
  return x;
}

bool is_missing(const Cell& c) { return !c.quoted && (c.text.empty() || c.text == "NA"); }

}  // namespace

DataTable parse_csv(std::string_view text) {
  const std::vector<Record> records = split_records(text);
  if (records.empty()) throw IoError("empty CSV input (no header row)");
  const Record& header = records.front();
  const std::size_t ncol = header.cells.size();
  std::unordered_set<std::string> seen;
  for (const auto& h : header.cells) {
    if (h.text.empty()) throw IoError("empty column name in header");
    if (!seen.insert(h.text).second) throw IoError("duplicate column name '" + h.text + "' in header");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].cells.size() != ncol) {
      throw IoError("line " + std::to_string(records[r].line) + " has " + std::to_string(records[r].cells.size()) +
                    " fields, expected " + std::to_string(ncol));
    }
  }

  DataTable table;
  for (std::size_t j = 0; j < ncol; ++j) {
    bool numeric = true;
    std::vector<double> numbers;
    for (std::size_t r = 1; r < records.size() && numeric; ++r) {
      const Cell& c = records[r].cells[j];
      if (is_missing(c)) {
        numbers.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto x = c.quoted ? std::nullopt : parse_number(c.text);
      if (!x) numeric = false;
      else numbers.push_back(*x);
    }
    if (numeric) {
      table.add(Column::numeric(header.cells[j].text, std::move(numbers)));
      continue;
    }
    std::vector<std::optional<std::string>> text_cells;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const Cell& c = records[r].cells[j];
      text_cells.push_back(is_missing(c) ? std::nullopt : std::optional<std::string>(c.text));
    }
    table.add(Column::categorical(header.cells[j].text, text_cells));
  }
  return table;
}

DataTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return parse_csv(ss.str());
}

}  // namespace lmm::cli
