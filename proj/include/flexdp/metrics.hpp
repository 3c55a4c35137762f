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
#ifndef FLEXDP_METRICS_HPP_
#define FLEXDP_METRICS_HPP_

// Max-frequency metrics: for each (table, column) the number of occurrences
// of the column's most frequent value. Metrics are gathered once per database
// snapshot and must be recollected whenever the most frequent join key
// changes.
//
// File format (line oriented, '#' starts a comment line):
//
//   [tables]
//   edges = 1000
//   [public]
//   cities
//   [mf]
//   edges.source = 65

#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flexdp/catalog.hpp"
#include "flexdp/error.hpp"
#include "flexdp/table.hpp"
#include "flexdp/value.hpp"

namespace flexdp {

struct ColumnKey {
  std::string table;
  std::string column;
  friend auto operator<=>(const ColumnKey&, const ColumnKey&) = default;
};

struct MetricsStore {
  std::map<std::string, std::uint64_t> row_counts;
  std::set<std::string> public_tables;
  std::map<ColumnKey, std::uint64_t> mf;

  friend bool operator==(const MetricsStore&, const MetricsStore&) = default;

  bool IsPublic(const std::string& table) const { return public_tables.count(table) > 0; }

  std::optional<std::uint64_t> MaxFrequency(const std::string& table,
                                            const std::string& column) const {
    auto it = mf.find({table, column});
    if (it == mf.end()) return std::nullopt;
    return it->second;
  }

  // A missing metric is never defaulted: a guessed value voids the bound.
  std::uint64_t RequireMaxFrequency(const std::string& table, const std::string& column) const {
    auto v = MaxFrequency(table, column);
    if (!v) {
      throw Error(ErrorCode::kMissingMetric,
                  "no max-frequency metric for join key " + table + "." + column);
    }
    return *v;
  }

  // Total rows over all tables; absent when no row counts are recorded.
  std::optional<std::uint64_t> DatabaseSize() const {
    if (row_counts.empty()) return std::nullopt;
    std::uint64_t n = 0;
    for (const auto& [t, c] : row_counts) n += c;
    return n;
  }

  // Tables with at least one metric column; columns in sorted order.
  Catalog ToCatalog() const {
    std::map<std::string, std::vector<std::string>> columns;
    for (const auto& [key, v] : mf) columns[key.table].push_back(key.column);
    Catalog catalog;
    for (auto& [t, cols] : columns) catalog.AddTable(t, std::move(cols));
    for (const auto& t : public_tables) {
      if (catalog.HasTable(t)) catalog.MarkPublic(t);
    }
    return catalog;
  }
};

inline bool IsIdentifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

// Checks the store's invariants: every referenced table is declared, and
// 1 <= mf <= rows for non-empty tables, mf == 0 for empty ones.
inline void ValidateMetrics(const MetricsStore& store) {
  for (const auto& t : store.public_tables) {
    if (!store.row_counts.count(t)) {
      throw Error(ErrorCode::kFormat, "public table '" + t + "' is not listed in [tables]");
    }
  }
  for (const auto& [key, value] : store.mf) {
    auto rows = store.row_counts.find(key.table);
    if (rows == store.row_counts.end()) {
      throw Error(ErrorCode::kFormat,
                  "metric for " + key.table + "." + key.column + " names an undeclared table");
    }
    if (value > rows->second) {
      throw Error(ErrorCode::kFormat, "mf(" + key.table + "." + key.column + ") = " +
                                          std::to_string(value) + " exceeds the row count " +
                                          std::to_string(rows->second));
    }
    if (rows->second > 0 && value == 0) {
      throw Error(ErrorCode::kFormat, "mf(" + key.table + "." + key.column +
                                          ") is 0 but the table is not empty");
    }
  }
}

namespace metrics_internal {

inline std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::uint64_t ParseCount(const std::string& text, std::size_t line) {
  if (!text.empty() && text[0] == '-') {
    throw Error(ErrorCode::kNegativeCount, "negative count '" + text + "'", line);
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kFormat, "expected a non-negative integer, found '" + text + "'", line);
  }
  return v;
}

}  // namespace metrics_internal

inline MetricsStore ParseMetrics(std::string_view text) {
  using metrics_internal::ParseCount;
  using metrics_internal::Trim;
  enum class Section { kNone, kTables, kPublic, kMf };
  MetricsStore store;
  Section section = Section::kNone;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::kFormat, "malformed section header", line_no);
      const std::string name = Trim(std::string_view(line).substr(1, line.size() - 2));
      if (name == "tables") {
        section = Section::kTables;
      } else if (name == "public") {
        section = Section::kPublic;
      } else if (name == "mf") {
        section = Section::kMf;
      } else {
        throw Error(ErrorCode::kFormat, "unknown section [" + name + "]", line_no);
      }
      continue;
    }
    if (section == Section::kNone) {
      throw Error(ErrorCode::kFormat, "entry outside of any section", line_no);
    }
    if (section == Section::kPublic) {
      if (!IsIdentifier(line)) throw Error(ErrorCode::kFormat, "bad table name '" + line + "'", line_no);
      if (!store.public_tables.insert(line).second) {
        throw Error(ErrorCode::kFormat, "duplicate public table '" + line + "'", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kFormat, "expected 'key = value'", line_no);
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::uint64_t value = ParseCount(Trim(std::string_view(line).substr(eq + 1)), line_no);
    if (section == Section::kTables) {
      if (!IsIdentifier(key)) throw Error(ErrorCode::kFormat, "bad table name '" + key + "'", line_no);
      if (!store.row_counts.emplace(key, value).second) {
        throw Error(ErrorCode::kFormat, "duplicate table '" + key + "'", line_no);
      }
    } else {
      const auto dot = key.find('.');
      if (dot == std::string::npos) {
        throw Error(ErrorCode::kFormat, "expected <table>.<column>, found '" + key + "'", line_no);
      }
      ColumnKey ck{Trim(std::string_view(key).substr(0, dot)),
                   Trim(std::string_view(key).substr(dot + 1))};
      if (!IsIdentifier(ck.table) || !IsIdentifier(ck.column)) {
        throw Error(ErrorCode::kFormat, "bad column reference '" + key + "'", line_no);
      }
      if (!store.mf.emplace(ck, value).second) {
        throw Error(ErrorCode::kFormat, "duplicate metric '" + key + "'", line_no);
      }
    }
  }
  ValidateMetrics(store);
  return store;
}

inline std::string FormatMetrics(const MetricsStore& store) {
  std::ostringstream out;
  out << "[tables]\n";
  for (const auto& [t, n] : store.row_counts) out << t << " = " << n << '\n';
  out << "[public]\n";
  for (const auto& t : store.public_tables) out << t << '\n';
  out << "[mf]\n";
  for (const auto& [key, v] : store.mf) out << key.table << '.' << key.column << " = " << v << '\n';
  return out.str();
}

inline MetricsStore LoadMetrics(const std::filesystem::path& path) {
  return ParseMetrics(ReadFile(path));
}

inline void SaveMetrics(const MetricsStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << FormatMetrics(store);
  if (!out.flush()) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

// The SQL an external database runs to produce mf for one column.
inline std::string MetricsCollectionSql(const Catalog& catalog, const std::string& table,
                                        const std::string& column) {
  if (!IsIdentifier(table) || !catalog.HasTable(table)) {
    throw Error(ErrorCode::kUnknownTable, "unknown table '" + table + "'");
  }
  if (!IsIdentifier(column) || !catalog.HasColumn(table, column)) {
    throw Error(ErrorCode::kUnknownColumn, "unknown column '" + table + "." + column + "'");
  }
  return "SELECT COUNT(*) AS freq FROM " + table + " GROUP BY " + column +
         " ORDER BY freq DESC LIMIT 1;";
}

// Multiplicity of the most frequent value; 0 for no values.
inline std::uint64_t MaxMultiplicity(std::span<const Value> values) {
  std::map<Value, std::uint64_t> counts;
  std::uint64_t best = 0;
  for (const auto& v : values) best = std::max(best, ++counts[v]);
  return best;
}

inline std::uint64_t CollectFromRows(const TableData& table, const std::string& column) {
  auto idx = table.ColumnIndex(column);
  if (!idx) throw Error(ErrorCode::kMissingColumn, "no column '" + column + "'");
  std::vector<Value> values;
  values.reserve(table.rows.size());
  for (const auto& row : table.rows) values.push_back(row[*idx]);
  return MaxMultiplicity(values);
}

// Metrics for every column of every table.
inline MetricsStore CollectMetrics(const std::map<std::string, TableData>& tables,
                                   const std::set<std::string>& public_tables = {}) {
  MetricsStore store;
  for (const auto& [name, table] : tables) {
    store.row_counts[name] = table.rows.size();
    for (const auto& c : table.columns) store.mf[{name, c}] = CollectFromRows(table, c);
  }
  for (const auto& t : public_tables) {
    if (!tables.count(t)) throw Error(ErrorCode::kUnknownTable, "unknown public table '" + t + "'");
    store.public_tables.insert(t);
  }
  return store;
}

}  // namespace flexdp

#endif  // FLEXDP_METRICS_HPP_
