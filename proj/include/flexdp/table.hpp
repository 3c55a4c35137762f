//
// Copyright 2026 The FlexDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef FLEXDP_TABLE_HPP_
#define FLEXDP_TABLE_HPP_

// In-memory tables and the CSV format they are stored in: a header line of
// column names, then one row per line. Cells that are decimal integers are
// integers, everything else is a string. Double quotes may wrap a cell.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flexdp/catalog.hpp"
#include "flexdp/error.hpp"
#include "flexdp/value.hpp"

namespace flexdp {

using Row = std::vector<Value>;

struct TableData {
  std::vector<std::string> columns;
  std::vector<Row> rows;

  std::optional<std::size_t> ColumnIndex(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  }
};

namespace csv_internal {

inline std::vector<std::string> SplitCsvLine(std::string_view line, std::size_t line_no) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && cell.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
      was_quoted = false;
    } else {
      cell += c;
    }
  }
  if (quoted) throw Error(ErrorCode::kFormat, "unterminated quoted cell", line_no);
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace csv_internal

inline TableData ParseCsv(std::string_view text) {
  TableData table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = csv_internal::SplitCsvLine(line, line_no);
    if (header) {
      table.columns = std::move(cells);
      header = false;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw Error(ErrorCode::kFormat,
                  "expected " + std::to_string(table.columns.size()) + " cells, found " +
                      std::to_string(cells.size()),
                  line_no);
    }
    Row row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(ParseValue(c));
    table.rows.push_back(std::move(row));
  }
  if (header) throw Error(ErrorCode::kFormat, "missing CSV header line");
  return table;
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline TableData ReadCsvTable(const std::filesystem::path& path) {
  try {
    return ParseCsv(ReadFile(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.what());
  }
}

// Every *.csv file in `dir`, keyed by file name minus extension.
inline std::map<std::string, TableData> LoadCsvDirectory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "data directory '" + dir.string() + "' does not exist");
  }
  std::map<std::string, TableData> tables;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      tables[entry.path().stem().string()] = ReadCsvTable(entry.path());
    }
  }
  return tables;
}

inline std::string FormatCsvCell(const Value& v) {
  std::string s = ToString(v);
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace flexdp

#endif  // FLEXDP_TABLE_HPP_
