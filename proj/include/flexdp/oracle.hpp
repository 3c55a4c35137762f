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
#ifndef FLEXDP_ORACLE_HPP_
#define FLEXDP_ORACLE_HPP_

// Ground truth for small databases: a bag-semantics evaluator for the core
// algebra and exhaustive local sensitivity at distance k.
//
// Neighbouring databases replace tuples and never add or remove them.
// Public tables are never modified. The distance between two results is the
// absolute difference for counts and the L1 distance over the union of group
// keys for histograms.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "flexdp/catalog.hpp"
#include "flexdp/error.hpp"
#include "flexdp/metrics.hpp"
#include "flexdp/relalg.hpp"
#include "flexdp/table.hpp"
#include "flexdp/value.hpp"

namespace flexdp {

inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

struct MicroDatabase {
  std::map<std::string, TableData> tables;
  std::map<ColumnKey, std::vector<Value>> domains;  // sorted, distinct
  std::set<std::string> public_tables;

  const std::vector<Value>& Domain(const std::string& table, const std::string& column) const {
    auto it = domains.find({table, column});
    if (it == domains.end()) {
      throw Error(ErrorCode::kEvaluation, "no value domain for " + table + "." + column);
    }
    return it->second;
  }

  // Fills in a domain for every column that lacks one from the values present.
  void DeriveMissingDomains() {
    for (const auto& [name, t] : tables) {
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        auto& dom = domains[{name, t.columns[c]}];
        if (!dom.empty()) continue;
        std::set<Value> seen;
        for (const auto& row : t.rows) seen.insert(row[c]);
        dom.assign(seen.begin(), seen.end());
      }
    }
  }

  void Validate() const {
    for (const auto& p : public_tables) {
      if (!tables.count(p)) throw Error(ErrorCode::kUnknownTable, "unknown public table '" + p + "'");
    }
    for (const auto& [key, dom] : domains) {
      if (!std::is_sorted(dom.begin(), dom.end()) ||
          std::adjacent_find(dom.begin(), dom.end()) != dom.end()) {
        throw Error(ErrorCode::kEvaluation,
                    "domain of " + key.table + "." + key.column + " has repeated values");
      }
    }
    for (const auto& [name, t] : tables) {
      for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) {
          throw Error(ErrorCode::kEvaluation, "row arity mismatch in table '" + name + "'");
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
          const auto& dom = Domain(name, t.columns[c]);
          if (!std::binary_search(dom.begin(), dom.end(), row[c])) {
            throw Error(ErrorCode::kEvaluation, "value '" + ToString(row[c]) +
                                                    "' is outside the domain of " + name + "." +
                                                    t.columns[c]);
          }
        }
      }
    }
  }

  Catalog ToCatalog() const {
    Catalog catalog;
    for (const auto& [name, t] : tables) catalog.AddTable(name, t.columns);
    for (const auto& p : public_tables) catalog.MarkPublic(p);
    return catalog;
  }
};

inline MetricsStore ComputeMetrics(const MicroDatabase& db) {
  return CollectMetrics(db.tables, db.public_tables);
}

// Optional domains.txt alongside the CSV files:
//
//   [domains]
//   edges.source = 1, 2, 3
//   [public]
//   cities
inline MicroDatabase LoadMicroDatabase(const std::filesystem::path& dir) {
  MicroDatabase db;
  db.tables = LoadCsvDirectory(dir);
  const auto domains_path = dir / "domains.txt";
  if (std::filesystem::exists(domains_path)) {
    using metrics_internal::Trim;
    std::istringstream in(ReadFile(domains_path));
    std::string raw;
    std::size_t line_no = 0;
    enum class Section { kNone, kDomains, kPublic } section = Section::kNone;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string line = Trim(raw);
      if (line.empty() || line[0] == '#') continue;
      if (line == "[domains]") {
        section = Section::kDomains;
      } else if (line == "[public]") {
        section = Section::kPublic;
      } else if (section == Section::kPublic) {
        db.public_tables.insert(line);
      } else if (section == Section::kDomains) {
        const auto eq = line.find('=');
        const auto dot = line.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
          throw Error(ErrorCode::kFormat, "expected '<table>.<column> = v1, v2, ...'", line_no);
        }
        ColumnKey key{Trim(line.substr(0, dot)), Trim(line.substr(dot + 1, eq - dot - 1))};
        std::set<Value> values;
        std::istringstream cells(line.substr(eq + 1));
        std::string cell;
        while (std::getline(cells, cell, ',')) values.insert(ParseValue(Trim(cell)));
        db.domains[key].assign(values.begin(), values.end());
      } else {
        throw Error(ErrorCode::kFormat, "entry outside of any section", line_no);
      }
    }
  }
  db.DeriveMissingDomains();
  db.Validate();
  return db;
}

// ---------------------------------------------------------------------------
// Evaluation

using Histogram = std::map<std::vector<Value>, std::int64_t>;
using QueryResult = std::variant<std::int64_t, Histogram>;

namespace oracle_internal {

inline const Value& OperandValue(const Operand& o, const Row& row) {
  if (const auto* a = std::get_if<AttrRef>(&o)) return row[a->index];
  return std::get<Value>(o);
}

inline bool Satisfies(const Predicate& p, const Row& row) {
  for (const auto& t : p.terms) {
    if (!ApplyCompare(t.op, row[t.lhs.index], OperandValue(t.rhs, row))) return false;
  }
  return true;
}

}  // namespace oracle_internal

inline std::vector<Row> Evaluate(const RelExpr& r, const std::map<std::string, TableData>& tables) {
  using oracle_internal::Satisfies;
  return std::visit(
      [&](const auto& n) -> std::vector<Row> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TableNode>) {
          auto it = tables.find(n.table);
          if (it == tables.end()) {
            throw Error(ErrorCode::kEvaluation, "table '" + n.table + "' is not loaded");
          }
          std::vector<std::size_t> cols;
          for (const auto& c : r.schema()) {
            const auto idx = it->second.ColumnIndex(std::get<BaseColumn>(c.provenance).column);
            if (!idx) {
              throw Error(ErrorCode::kMissingColumn,
                          "table '" + n.table + "' has no column '" + c.name + "'");
            }
            cols.push_back(*idx);
          }
          std::vector<Row> out;
          out.reserve(it->second.rows.size());
          for (const auto& row : it->second.rows) {
            Row projected;
            projected.reserve(cols.size());
            for (auto c : cols) projected.push_back(row[c]);
            out.push_back(std::move(projected));
          }
          return out;
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          const auto left = Evaluate(*n.left, tables);
          const auto right = Evaluate(*n.right, tables);
          std::map<Value, std::vector<const Row*>> index;
          for (const auto& row : right) index[row[n.key_right.index]].push_back(&row);
          std::vector<Row> out;
          for (const auto& l : left) {
            auto it = index.find(l[n.key_left.index]);
            if (it == index.end()) continue;
            for (const Row* rr : it->second) {
              Row joined = l;
              joined.insert(joined.end(), rr->begin(), rr->end());
              if (Satisfies(n.residual, joined)) out.push_back(std::move(joined));
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, ProjectNode>) {
          std::vector<Row> out;
          for (const auto& row : Evaluate(*n.input, tables)) {
            Row projected;
            for (const auto& a : n.attrs) projected.push_back(row[a.index]);
            out.push_back(std::move(projected));
          }
          return out;
        } else if constexpr (std::is_same_v<T, SelectNode>) {
          std::vector<Row> out;
          for (auto& row : Evaluate(*n.input, tables)) {
            if (Satisfies(n.pred, row)) out.push_back(std::move(row));
          }
          return out;
        } else if constexpr (std::is_same_v<T, CountNode>) {
          const auto rows = Evaluate(*n.input, tables);
          return {Row{Value(static_cast<std::int64_t>(rows.size()))}};
        } else {
          Histogram groups;
          for (const auto& row : Evaluate(*n.input, tables)) {
            std::vector<Value> key;
            for (const auto& a : n.group_attrs) key.push_back(row[a.index]);
            ++groups[key];
          }
          std::vector<Row> out;
          for (auto& [key, count] : groups) {
            Row row = key;
            row.push_back(Value(count));
            out.push_back(std::move(row));
          }
          return out;
        }
      },
      r.node());
}

inline QueryResult EvaluateQuery(const RelExpr& q, const std::map<std::string, TableData>& tables) {
  if (!q.IsCountRoot()) {
    throw Error(ErrorCode::kUnsupportedQuery, "outermost operation is not a count");
  }
  const auto rows = Evaluate(q, tables);
  if (q.As<CountNode>()) return std::get<std::int64_t>(rows.at(0).at(0));
  Histogram h;
  for (const auto& row : rows) {
    h[std::vector<Value>(row.begin(), row.end() - 1)] = std::get<std::int64_t>(row.back());
  }
  return h;
}

inline QueryResult EvaluateQuery(const RelExpr& q, const MicroDatabase& db) {
  return EvaluateQuery(q, db.tables);
}

inline std::uint64_t ResultDistance(const QueryResult& a, const QueryResult& b) {
  auto diff = [](std::int64_t x, std::int64_t y) {
    return static_cast<std::uint64_t>(x > y ? x - y : y - x);
  };
  if (a.index() != b.index()) {
    throw Error(ErrorCode::kEvaluation, "cannot compare a count with a histogram");
  }
  if (const auto* x = std::get_if<std::int64_t>(&a)) return diff(*x, std::get<std::int64_t>(b));
  const auto& ha = std::get<Histogram>(a);
  const auto& hb = std::get<Histogram>(b);
  std::uint64_t total = 0;
  for (const auto& [key, count] : ha) {
    auto it = hb.find(key);
    total += diff(count, it == hb.end() ? 0 : it->second);
  }
  for (const auto& [key, count] : hb) {
    if (!ha.count(key)) total += diff(count, 0);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Positional neighbourhoods: every database reachable by replacing up to k
// rows of non-public tables with other tuples of the table's domain.

namespace oracle_internal {

// All tuples over the column domains of `table`, in lexicographic order.
inline std::vector<Row> TupleDomain(const MicroDatabase& db, const std::string& table) {
  std::vector<Row> tuples{{}};
  for (const auto& col : db.tables.at(table).columns) {
    const auto& dom = db.Domain(table, col);
    std::vector<Row> next;
    next.reserve(tuples.size() * dom.size());
    for (const auto& prefix : tuples) {
      for (const auto& v : dom) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
      if (next.size() > kEnumerationLimit) {
        throw Error(ErrorCode::kTooLargeToEnumerate,
                    "tuple domain of '" + table + "' exceeds the enumeration limit");
      }
    }
    tuples = std::move(next);
  }
  return tuples;
}

inline std::uint64_t SaturatingAdd(std::uint64_t a, std::uint64_t b) {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

inline std::uint64_t SaturatingMul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > UINT64_MAX / b ? UINT64_MAX : a * b;
}

}  // namespace oracle_internal

// Number of distinct databases within positional distance k.
inline std::uint64_t CountNeighbors(const MicroDatabase& db, std::uint64_t k) {
  using namespace oracle_internal;
  std::vector<std::uint64_t> poly{1};  // poly[d] = databases at distance exactly d
  for (const auto& [name, t] : db.tables) {
    if (db.public_tables.count(name) || t.rows.empty()) continue;
    std::uint64_t alternatives = 1;
    for (const auto& c : t.columns) alternatives = SaturatingMul(alternatives, db.Domain(name, c).size());
    alternatives -= alternatives > 0 ? 1 : 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      std::vector<std::uint64_t> next(std::min<std::size_t>(poly.size() + 1, k + 1), 0);
      for (std::size_t d = 0; d < poly.size(); ++d) {
        if (d < next.size()) next[d] = SaturatingAdd(next[d], poly[d]);
        if (d + 1 < next.size()) next[d + 1] = SaturatingAdd(next[d + 1], SaturatingMul(poly[d], alternatives));
      }
      poly = std::move(next);
    }
  }
  std::uint64_t total = 0;
  for (auto v : poly) total = SaturatingAdd(total, v);
  return total;
}

// Calls `visit` once for each distinct database within positional distance k,
// the input itself included. The database passed to `visit` is only valid
// during the call.
inline void ForEachNeighbor(const MicroDatabase& db, std::uint64_t k,
                            const std::function<void(const MicroDatabase&)>& visit) {
  const std::uint64_t count = CountNeighbors(db, k);
  if (count > kEnumerationLimit) {
    throw Error(ErrorCode::kTooLargeToEnumerate,
                std::to_string(count) + " neighbouring databases exceed the enumeration limit");
  }
  struct Position {
    std::string table;
    std::size_t row;
  };
  std::vector<Position> positions;
  std::map<std::string, std::vector<Row>> tuples;
  for (const auto& [name, t] : db.tables) {
    if (db.public_tables.count(name)) continue;
    tuples[name] = oracle_internal::TupleDomain(db, name);
    for (std::size_t i = 0; i < t.rows.size(); ++i) positions.push_back({name, i});
  }
  MicroDatabase work = db;
  std::function<void(std::size_t, std::uint64_t)> recurse = [&](std::size_t p, std::uint64_t left) {
    if (p == positions.size() || left == 0) {
      visit(work);
      return;
    }
    recurse(p + 1, left);
    Row& slot = work.tables[positions[p].table].rows[positions[p].row];
    const Row original = slot;
    for (const auto& t : tuples[positions[p].table]) {
      if (t == original) continue;
      slot = t;
      recurse(p + 1, left - 1);
    }
    slot = original;
  };
  recurse(0, k);
}

inline std::vector<MicroDatabase> NeighborsAt(const MicroDatabase& db, std::uint64_t k) {
  std::vector<MicroDatabase> out;
  ForEachNeighbor(db, k, [&](const MicroDatabase& y) { out.push_back(y); });
  return out;
}

// Direct transcription of the definition: max over y within distance k of
// max over neighbours z of y of |q(y) - q(z)|. Only usable on tiny inputs.
inline std::uint64_t LocalSensitivityAtPositional(const RelExpr& q, const MicroDatabase& db,
                                                  std::uint64_t k) {
  std::uint64_t best = 0;
  ForEachNeighbor(db, k, [&](const MicroDatabase& y) {
    const QueryResult qy = EvaluateQuery(q, y);
    ForEachNeighbor(y, 1, [&](const MicroDatabase& z) {
      best = std::max(best, ResultDistance(qy, EvaluateQuery(q, z)));
    });
  });
  return best;
}

// ---------------------------------------------------------------------------
// Multiset neighbourhoods. Query results do not depend on row order, so a
// table is a multiset of tuple codes and the distance from x to y is the
// number of rows of x missing from y. Enumerating multisets instead of
// positions removes the row-permutation redundancy.

class Neighborhood {
 public:
  using Code = std::uint32_t;
  using State = std::vector<std::vector<Code>>;  // sorted codes per mutable table

  // Tables in `mutable_tables` that are present and not public vary.
  Neighborhood(const MicroDatabase& db, const std::set<std::string>& mutable_tables)
      : work_(db.tables) {
    for (const auto& name : mutable_tables) {
      if (!db.tables.count(name) || db.public_tables.count(name)) continue;
      names_.push_back(name);
      tuples_.push_back(oracle_internal::TupleDomain(db, name));
      std::map<Row, Code> lookup;
      for (Code c = 0; c < tuples_.back().size(); ++c) lookup[tuples_.back()[c]] = c;
      std::vector<Code> codes;
      for (const auto& row : db.tables.at(name).rows) {
        auto it = lookup.find(row);
        if (it == lookup.end()) {
          throw Error(ErrorCode::kEvaluation, "row of '" + name + "' is outside its domain");
        }
        codes.push_back(it->second);
      }
      std::sort(codes.begin(), codes.end());
      origin_.push_back(std::move(codes));
    }
  }

  const State& origin() const { return origin_; }

  // Calls `visit(y, d)` once per distinct y with d = distance(x, y) <= k.
  void ForEachWithin(std::uint64_t k, const std::function<void(const State&, std::uint64_t)>& visit) {
    std::vector<std::vector<std::pair<std::vector<Code>, std::uint64_t>>> variants;
    for (std::size_t t = 0; t < names_.size(); ++t) variants.push_back(Variants(t, k));
    std::vector<std::uint64_t> ways{1};
    for (const auto& v : variants) {
      std::vector<std::uint64_t> next(k + 1, 0);
      for (std::size_t d = 0; d < ways.size(); ++d) {
        for (const auto& [codes, dist] : v) {
          if (d + dist <= k) next[d + dist] = oracle_internal::SaturatingAdd(next[d + dist], ways[d]);
        }
      }
      ways = std::move(next);
    }
    std::uint64_t total = 0;
    for (auto w : ways) total = oracle_internal::SaturatingAdd(total, w);
    if (total > kEnumerationLimit) {
      throw Error(ErrorCode::kTooLargeToEnumerate,
                  std::to_string(total) + " databases within distance " + std::to_string(k) +
                      " exceed the enumeration limit");
    }
    State state(names_.size());
    std::function<void(std::size_t, std::uint64_t)> recurse = [&](std::size_t t, std::uint64_t used) {
      if (t == names_.size()) {
        visit(state, used);
        return;
      }
      for (const auto& [codes, dist] : variants[t]) {
        if (used + dist > k) continue;
        state[t] = codes;
        recurse(t + 1, used + dist);
      }
    };
    recurse(0, 0);
  }

  // Calls `visit(z)` for each z that differs from y in exactly one row.
  void ForEachAdjacent(const State& y, const std::function<void(const State&)>& visit) const {
    State z = y;
    for (std::size_t t = 0; t < y.size(); ++t) {
      const Code domain = static_cast<Code>(tuples_[t].size());
      for (std::size_t i = 0; i < y[t].size(); ++i) {
        if (i > 0 && y[t][i] == y[t][i - 1]) continue;
        for (Code c = 0; c < domain; ++c) {
          if (c == y[t][i]) continue;
          z[t] = y[t];
          z[t].erase(z[t].begin() + static_cast<std::ptrdiff_t>(i));
          z[t].insert(std::upper_bound(z[t].begin(), z[t].end(), c), c);
          visit(z);
        }
      }
      z[t] = y[t];
    }
  }

  // The tables of `db` with the mutable ones replaced by `s`.
  const std::map<std::string, TableData>& Materialize(const State& s) {
    for (std::size_t t = 0; t < names_.size(); ++t) {
      auto& rows = work_[names_[t]].rows;
      rows.clear();
      for (Code c : s[t]) rows.push_back(tuples_[t][c]);
    }
    return work_;
  }

  // Row counts never change, so concatenated codes identify a state.
  static std::string Key(const State& s) {
    std::string key;
    for (const auto& codes : s) {
      for (Code c : codes) {
        key.append(reinterpret_cast<const char*>(&c), sizeof(c));
      }
    }
    return key;
  }

 private:
  // Distinct multisets y_t at distance <= k from origin table t.
  std::vector<std::pair<std::vector<Code>, std::uint64_t>> Variants(std::size_t t, std::uint64_t k) const {
    const auto& x = origin_[t];
    const Code domain = static_cast<Code>(tuples_[t].size());
    std::map<Code, std::size_t> counts;
    for (Code c : x) ++counts[c];
    std::vector<std::pair<Code, std::size_t>> distinct(counts.begin(), counts.end());
    std::map<std::vector<Code>, std::uint64_t> seen;
    std::uint64_t attempts = 0;
    const std::uint64_t max_r = std::min<std::uint64_t>(k, x.size());
    for (std::uint64_t r = 0; r <= max_r; ++r) {
      // Choose how many of each distinct code to drop.
      std::vector<Code> kept;
      std::function<void(std::size_t, std::uint64_t)> drop = [&](std::size_t i, std::uint64_t left) {
        if (i == distinct.size()) {
          if (left != 0) return;
          std::vector<Code> added;
          std::function<void(Code, std::uint64_t)> add = [&](Code from, std::uint64_t need) {
            if (need == 0) {
              if (++attempts > kEnumerationLimit) {
                throw Error(ErrorCode::kTooLargeToEnumerate,
                            "variants of '" + names_[t] + "' exceed the enumeration limit");
              }
              std::vector<Code> y = kept;
              y.insert(y.end(), added.begin(), added.end());
              std::sort(y.begin(), y.end());
              if (!seen.count(y)) seen.emplace(y, Distance(x, y));
              return;
            }
            for (Code c = from; c < domain; ++c) {
              added.push_back(c);
              add(c, need - 1);
              added.pop_back();
            }
          };
          add(0, r);
          return;
        }
        const auto [code, available] = distinct[i];
        for (std::uint64_t d = 0; d <= std::min<std::uint64_t>(available, left); ++d) {
          const std::size_t keep = available - d;
          kept.insert(kept.end(), keep, code);
          drop(i + 1, left - d);
          kept.resize(kept.size() - keep);
        }
      };
      drop(0, r);
    }
    return {seen.begin(), seen.end()};
  }

  // Rows of x with no counterpart in y; both sorted.
  static std::uint64_t Distance(const std::vector<Code>& x, const std::vector<Code>& y) {
    std::vector<Code> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    return x.size() - common.size();
  }

  std::map<std::string, TableData> work_;
  std::vector<std::string> names_;
  std::vector<std::vector<Row>> tuples_;
  State origin_;
};

namespace oracle_internal {

inline std::set<std::string> PrivateAncestors(const RelExpr& r, const MicroDatabase& db) {
  std::set<std::string> out;
  for (const auto& t : Ancestors(r)) {
    if (!db.public_tables.count(t)) out.insert(t);
  }
  return out;
}

inline std::vector<std::uint64_t> PrefixMax(std::vector<std::uint64_t> v) {
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
  return v;
}

}  // namespace oracle_internal

// A_q^(k)(x) for k = 0 .. max_k in one pass.
inline std::vector<std::uint64_t> LocalSensitivityProfile(const RelExpr& q, const MicroDatabase& db,
                                                          std::uint64_t max_k) {
  Neighborhood hood(db, oracle_internal::PrivateAncestors(q, db));
  std::unordered_map<std::string, QueryResult> memo;
  auto eval = [&](const Neighborhood::State& s) -> const QueryResult& {
    std::string key = Neighborhood::Key(s);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(std::move(key), EvaluateQuery(q, hood.Materialize(s))).first;
    return it->second;
  };
  std::vector<std::uint64_t> best(max_k + 1, 0);
  hood.ForEachWithin(max_k, [&](const Neighborhood::State& y, std::uint64_t d) {
    const QueryResult qy = eval(y);
    std::uint64_t ls = 0;
    hood.ForEachAdjacent(y, [&](const Neighborhood::State& z) {
      ls = std::max(ls, ResultDistance(qy, eval(z)));
    });
    best[d] = std::max(best[d], ls);
  });
  return oracle_internal::PrefixMax(std::move(best));
}

inline std::uint64_t LocalSensitivityAt(const RelExpr& q, const MicroDatabase& db, std::uint64_t k) {
  return LocalSensitivityProfile(q, db, k)[k];
}

// Largest multiplicity of any value in output column `column` of `r`, over
// every database within distance k, for k = 0 .. max_k.
inline std::vector<std::uint64_t> MaxFrequencyProfile(const RelExpr& r, std::size_t column,
                                                      const MicroDatabase& db, std::uint64_t max_k) {
  if (column >= r.schema().size()) {
    throw Error(ErrorCode::kUnresolvedAttribute, "column index out of range");
  }
  Neighborhood hood(db, oracle_internal::PrivateAncestors(r, db));
  std::vector<std::uint64_t> best(max_k + 1, 0);
  hood.ForEachWithin(max_k, [&](const Neighborhood::State& y, std::uint64_t d) {
    std::map<Value, std::uint64_t> counts;
    for (const auto& row : Evaluate(r, hood.Materialize(y))) {
      best[d] = std::max(best[d], ++counts[row[column]]);
    }
  });
  return oracle_internal::PrefixMax(std::move(best));
}

inline std::uint64_t MaxFrequencyAt(const RelExpr& r, std::size_t column, const MicroDatabase& db,
                                    std::uint64_t k) {
  return MaxFrequencyProfile(r, column, db, k)[k];
}

}  // namespace flexdp

#endif  // FLEXDP_ORACLE_HPP_
