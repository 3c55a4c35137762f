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
#ifndef FLEXDP_CATALOG_HPP_
#define FLEXDP_CATALOG_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flexdp/error.hpp"

namespace flexdp {

// Table names, their ordered column lists, and which tables are public.
class Catalog {
 public:
  void AddTable(const std::string& name, std::vector<std::string> columns) {
    if (HasTable(name)) throw Error(ErrorCode::kFormat, "duplicate table '" + name + "'");
    if (columns.empty()) {
      throw Error(ErrorCode::kFormat, "table '" + name + "' has no columns");
    }
    std::set<std::string> seen;
    for (const auto& c : columns) {
      if (!seen.insert(c).second) {
        throw Error(ErrorCode::kFormat,
                    "duplicate column '" + c + "' in table '" + name + "'");
      }
    }
    tables_[name] = std::move(columns);
  }

  void MarkPublic(const std::string& name) {
    if (!HasTable(name)) {
      throw Error(ErrorCode::kUnknownTable, "unknown table '" + name + "'");
    }
    public_tables_.insert(name);
  }

  bool HasTable(const std::string& name) const { return tables_.count(name) > 0; }
  bool IsPublic(const std::string& name) const { return public_tables_.count(name) > 0; }

  const std::vector<std::string>& Columns(const std::string& table) const {
    auto it = tables_.find(table);
    if (it == tables_.end()) {
      throw Error(ErrorCode::kUnknownTable, "unknown table '" + table + "'");
    }
    return it->second;
  }

  bool HasColumn(const std::string& table, const std::string& column) const {
    auto it = tables_.find(table);
    return it != tables_.end() &&
           std::find(it->second.begin(), it->second.end(), column) != it->second.end();
  }

  const std::map<std::string, std::vector<std::string>>& tables() const { return tables_; }
  const std::set<std::string>& public_tables() const { return public_tables_; }

 private:
  std::map<std::string, std::vector<std::string>> tables_;
  std::set<std::string> public_tables_;
};

}  // namespace flexdp

#endif  // FLEXDP_CATALOG_HPP_
