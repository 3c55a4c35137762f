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
#ifndef FLEXDP_RELALG_HPP_
#define FLEXDP_RELALG_HPP_

// Core relational algebra for counting queries: tables, equijoins,
// projection, selection, Count and grouped Count.
//
// Every node carries its output schema. Attribute references are positional
// (an index into the schema of the node's input) and keep the name the query
// used so diagnostics can quote it back.

#include <cstddef>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "flexdp/catalog.hpp"
#include "flexdp/error.hpp"
#include "flexdp/value.hpp"

namespace flexdp {

struct BaseColumn {
  std::string table;
  std::string column;
  friend bool operator==(const BaseColumn&, const BaseColumn&) = default;
};

// An attribute produced by an aggregation rather than read from a table.
struct Derived {
  std::string origin;
  friend bool operator==(const Derived&, const Derived&) = default;
};

using Provenance = std::variant<BaseColumn, Derived>;

inline bool IsBaseColumn(const Provenance& p) {
  return std::holds_alternative<BaseColumn>(p);
}

struct Column {
  std::string name;
  Provenance provenance;
};

using Schema = std::vector<Column>;

struct AttrRef {
  std::string name;
  std::size_t index = 0;
  Provenance provenance;
};

enum class CompareOp { kLt, kLe, kEq, kNe, kGe, kGt };

inline std::string_view OpSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kEq: return "=";
    case CompareOp::kNe: return "<>";
    case CompareOp::kGe: return ">=";
    case CompareOp::kGt: return ">";
  }
  return "?";
}

// The operator that gives the same result with operands swapped.
inline CompareOp Mirror(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return CompareOp::kGt;
    case CompareOp::kLe: return CompareOp::kGe;
    case CompareOp::kGe: return CompareOp::kLe;
    case CompareOp::kGt: return CompareOp::kLt;
    default: return op;
  }
}

inline bool ApplyCompare(CompareOp op, const Value& a, const Value& b) {
  switch (op) {
    case CompareOp::kLt: return a < b;
    case CompareOp::kLe: return a <= b;
    case CompareOp::kEq: return a == b;
    case CompareOp::kNe: return a != b;
    case CompareOp::kGe: return a >= b;
    case CompareOp::kGt: return a > b;
  }
  return false;
}

using Operand = std::variant<AttrRef, Value>;

struct Comparison {
  AttrRef lhs;
  CompareOp op = CompareOp::kEq;
  Operand rhs;
};

// Conjunction of comparisons. An empty predicate is always true.
struct Predicate {
  std::vector<Comparison> terms;
  bool empty() const { return terms.empty(); }
};

class RelExpr;
using RelPtr = std::shared_ptr<const RelExpr>;

struct TableNode {
  std::string table;
  std::string alias;
};

struct JoinNode {
  RelPtr left;
  RelPtr right;
  AttrRef key_left;   // indexes left->schema()
  AttrRef key_right;  // indexes right->schema()
  Predicate residual; // indexes the concatenated schema
};

struct ProjectNode {
  std::vector<AttrRef> attrs;
  std::vector<std::string> output_names;
  RelPtr input;
};

struct SelectNode {
  Predicate pred;
  RelPtr input;
};

struct CountNode {
  RelPtr input;
  std::string output_name = "count";
};

struct CountGroupedNode {
  std::vector<AttrRef> group_attrs;
  RelPtr input;
  std::string output_name = "count";
};

Provenance ResolveColumn(const RelExpr& r, std::size_t index);

class RelExpr {
 public:
  using Node =
      std::variant<TableNode, JoinNode, ProjectNode, SelectNode, CountNode, CountGroupedNode>;

  static RelPtr Table(const Catalog& catalog, const std::string& table,
                      std::string alias = {}) {
    Schema schema;
    for (const auto& c : catalog.Columns(table)) {
      schema.push_back({c, BaseColumn{table, c}});
    }
    if (alias.empty()) alias = table;
    return Make(TableNode{table, std::move(alias)}, std::move(schema));
  }

  // Rejects keys that do not trace back to an original table column.
  static RelPtr Join(RelPtr left, RelPtr right, AttrRef key_left, AttrRef key_right,
                     Predicate residual = {}) {
    CheckIndex(*left, key_left);
    CheckIndex(*right, key_right);
    key_left.provenance = ResolveColumn(*left, key_left.index);
    key_right.provenance = ResolveColumn(*right, key_right.index);
    for (const AttrRef* key : {&key_left, &key_right}) {
      if (!IsBaseColumn(key->provenance)) {
        throw Error(ErrorCode::kUnsupportedQuery,
                    "join key '" + key->name +
                        "' is not drawn from an original table (derived from " +
                        std::get<Derived>(key->provenance).origin + ")");
      }
    }
    Schema schema = left->schema();
    schema.insert(schema.end(), right->schema().begin(), right->schema().end());
    CheckPredicate(schema, residual);
    return Make(JoinNode{std::move(left), std::move(right), std::move(key_left),
                         std::move(key_right), std::move(residual)},
                std::move(schema));
  }

  static RelPtr Project(RelPtr input, std::vector<AttrRef> attrs,
                        std::vector<std::string> output_names = {}) {
    if (output_names.empty()) {
      for (const auto& a : attrs) output_names.push_back(ShortName(a.name));
    }
    if (output_names.size() != attrs.size()) {
      throw Error(ErrorCode::kParse, "projection name list does not match attributes");
    }
    Schema schema;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      CheckIndex(*input, attrs[i]);
      attrs[i].provenance = ResolveColumn(*input, attrs[i].index);
      schema.push_back({output_names[i], attrs[i].provenance});
    }
    return Make(ProjectNode{std::move(attrs), std::move(output_names), std::move(input)},
                std::move(schema));
  }

  static RelPtr Select(RelPtr input, Predicate pred) {
    CheckPredicate(input->schema(), pred);
    Schema schema = input->schema();
    return Make(SelectNode{std::move(pred), std::move(input)}, std::move(schema));
  }

  static RelPtr Count(RelPtr input, std::string output_name = "count") {
    Schema schema{{output_name, Derived{"COUNT"}}};
    return Make(CountNode{std::move(input), std::move(output_name)}, std::move(schema));
  }

  static RelPtr CountGrouped(RelPtr input, std::vector<AttrRef> group_attrs,
                             std::string output_name = "count") {
    Schema schema;
    for (auto& g : group_attrs) {
      CheckIndex(*input, g);
      g.provenance = ResolveColumn(*input, g.index);
      schema.push_back({ShortName(g.name), Derived{"GROUP BY " + g.name}});
    }
    schema.push_back({output_name, Derived{"COUNT"}});
    return Make(CountGroupedNode{std::move(group_attrs), std::move(input),
                                 std::move(output_name)},
                std::move(schema));
  }

  const Node& node() const { return node_; }
  const Schema& schema() const { return schema_; }

  template <class T>
  const T* As() const {
    return std::get_if<T>(&node_);
  }

  bool IsCountRoot() const {
    return As<CountNode>() != nullptr || As<CountGroupedNode>() != nullptr;
  }

 private:
  RelExpr(Node node, Schema schema) : node_(std::move(node)), schema_(std::move(schema)) {}

  static RelPtr Make(Node node, Schema schema) {
    return RelPtr(new RelExpr(std::move(node), std::move(schema)));
  }

  static std::string ShortName(const std::string& name) {
    auto dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(dot + 1);
  }

  static void CheckIndex(const RelExpr& input, const AttrRef& a) {
    if (a.index >= input.schema().size()) {
      throw Error(ErrorCode::kUnresolvedAttribute,
                  "attribute '" + a.name + "' is not in scope");
    }
  }

  static void CheckPredicate(const Schema& schema, const Predicate& pred) {
    for (const auto& term : pred.terms) {
      if (term.lhs.index >= schema.size()) {
        throw Error(ErrorCode::kUnresolvedAttribute,
                    "attribute '" + term.lhs.name + "' is not in scope");
      }
      if (const auto* a = std::get_if<AttrRef>(&term.rhs); a && a->index >= schema.size()) {
        throw Error(ErrorCode::kUnresolvedAttribute,
                    "attribute '" + a->name + "' is not in scope");
      }
    }
  }

  Node node_;
  Schema schema_;
};

// Traces output column `index` of `r` to the table column it was read from.
// Passing through an aggregation makes the column Derived.
inline Provenance ResolveColumn(const RelExpr& r, std::size_t index) {
  if (index >= r.schema().size()) {
    throw Error(ErrorCode::kUnresolvedAttribute,
                "column index " + std::to_string(index) + " out of range");
  }
  return r.schema()[index].provenance;
}

inline Provenance ResolveAttribute(const AttrRef& a, const RelExpr& r) {
  if (a.index >= r.schema().size()) {
    throw Error(ErrorCode::kUnresolvedAttribute, "attribute '" + a.name + "' is not in scope");
  }
  return ResolveColumn(r, a.index);
}

// Tables possibly contributing rows to `r`.
inline std::set<std::string> Ancestors(const RelExpr& r) {
  return std::visit(
      [](const auto& n) -> std::set<std::string> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TableNode>) {
          return {n.table};
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          auto out = Ancestors(*n.left);
          auto right = Ancestors(*n.right);
          out.insert(right.begin(), right.end());
          return out;
        } else {
          return Ancestors(*n.input);
        }
      },
      r.node());
}

inline bool IsSelfJoin(const JoinNode& join) {
  auto left = Ancestors(*join.left);
  for (const auto& t : Ancestors(*join.right)) {
    if (left.count(t)) return true;
  }
  return false;
}

inline std::size_t JoinCount(const RelExpr& r) {
  return std::visit(
      [](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TableNode>) {
          return 0;
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          return 1 + JoinCount(*n.left) + JoinCount(*n.right);
        } else {
          return JoinCount(*n.input);
        }
      },
      r.node());
}

namespace internal {

inline void PrintOperand(std::ostream& os, const Operand& o) {
  if (const auto* a = std::get_if<AttrRef>(&o)) {
    os << a->name;
  } else {
    const Value& v = std::get<Value>(o);
    if (std::holds_alternative<std::string>(v)) {
      os << '\'' << std::get<std::string>(v) << '\'';
    } else {
      os << std::get<std::int64_t>(v);
    }
  }
}

inline void PrintPredicate(std::ostream& os, const Predicate& p) {
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    if (i) os << " AND ";
    os << p.terms[i].lhs.name << ' ' << OpSymbol(p.terms[i].op) << ' ';
    PrintOperand(os, p.terms[i].rhs);
  }
}

inline void PrintAttrs(std::ostream& os, const std::vector<AttrRef>& attrs) {
  for (std::size_t i = 0; i < attrs.size(); ++i) os << (i ? ", " : "") << attrs[i].name;
}

inline void Print(std::ostream& os, const RelExpr& r) {
  std::visit(
      [&os](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TableNode>) {
          os << "Table(" << n.table;
          if (n.alias != n.table) os << " AS " << n.alias;
          os << ')';
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          os << "Join(";
          Print(os, *n.left);
          os << ", ";
          Print(os, *n.right);
          os << ", " << n.key_left.name << " = " << n.key_right.name;
          if (!n.residual.empty()) {
            os << ", ";
            PrintPredicate(os, n.residual);
          }
          os << ')';
        } else if constexpr (std::is_same_v<T, ProjectNode>) {
          os << "Project([";
          PrintAttrs(os, n.attrs);
          os << "], ";
          Print(os, *n.input);
          os << ')';
        } else if constexpr (std::is_same_v<T, SelectNode>) {
          os << "Select(";
          PrintPredicate(os, n.pred);
          os << ", ";
          Print(os, *n.input);
          os << ')';
        } else if constexpr (std::is_same_v<T, CountNode>) {
          os << "Count(";
          Print(os, *n.input);
          os << ')';
        } else {
          os << "CountGrouped([";
          PrintAttrs(os, n.group_attrs);
          os << "], ";
          Print(os, *n.input);
          os << ')';
        }
      },
      r.node());
}

}  // namespace internal

inline std::string ToString(const RelExpr& r) {
  std::ostringstream os;
  internal::Print(os, r);
  return os.str();
}

// Structural equality: same node kinds, tables, attribute positions, and
// predicate terms, recursively.
inline bool StructurallyEqual(const RelExpr& a, const RelExpr& b);

namespace internal {

inline bool SameAttr(const AttrRef& a, const AttrRef& b) {
  return a.index == b.index && a.name == b.name && a.provenance == b.provenance;
}

inline bool SameAttrs(const std::vector<AttrRef>& a, const std::vector<AttrRef>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!SameAttr(a[i], b[i])) return false;
  }
  return true;
}

inline bool SameOperand(const Operand& a, const Operand& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<AttrRef>(&a)) return SameAttr(*x, std::get<AttrRef>(b));
  return std::get<Value>(a) == std::get<Value>(b);
}

inline bool SamePredicate(const Predicate& a, const Predicate& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    const auto& x = a.terms[i];
    const auto& y = b.terms[i];
    if (!SameAttr(x.lhs, y.lhs) || x.op != y.op || !SameOperand(x.rhs, y.rhs)) return false;
  }
  return true;
}

}  // namespace internal

inline bool StructurallyEqual(const RelExpr& a, const RelExpr& b) {
  if (a.node().index() != b.node().index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.node());
        if constexpr (std::is_same_v<T, TableNode>) {
          return x.table == y.table && x.alias == y.alias;
        } else if constexpr (std::is_same_v<T, JoinNode>) {
          return internal::SameAttr(x.key_left, y.key_left) &&
                 internal::SameAttr(x.key_right, y.key_right) &&
                 internal::SamePredicate(x.residual, y.residual) &&
                 StructurallyEqual(*x.left, *y.left) && StructurallyEqual(*x.right, *y.right);
        } else if constexpr (std::is_same_v<T, ProjectNode>) {
          return internal::SameAttrs(x.attrs, y.attrs) && x.output_names == y.output_names &&
                 StructurallyEqual(*x.input, *y.input);
        } else if constexpr (std::is_same_v<T, SelectNode>) {
          return internal::SamePredicate(x.pred, y.pred) && StructurallyEqual(*x.input, *y.input);
        } else if constexpr (std::is_same_v<T, CountNode>) {
          return x.output_name == y.output_name && StructurallyEqual(*x.input, *y.input);
        } else {
          return internal::SameAttrs(x.group_attrs, y.group_attrs) &&
                 x.output_name == y.output_name && StructurallyEqual(*x.input, *y.input);
        }
      },
      a.node());
}

}  // namespace flexdp

#endif  // FLEXDP_RELALG_HPP_
