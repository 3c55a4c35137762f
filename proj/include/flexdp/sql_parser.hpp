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
#ifndef FLEXDP_SQL_PARSER_HPP_
#define FLEXDP_SQL_PARSER_HPP_

// Parser for the SQL subset that maps onto the core relational algebra:
//
//   query  := [WITH name AS '(' select ')' {',' ...}] select [';']
//   select := SELECT items FROM source {[INNER] JOIN source ON cond}
//             [WHERE cond] [GROUP BY attr {',' attr}]
//   source := table [[AS] alias] | '(' select ')' [AS] alias
//   cond   := term {AND term}
//   term   := operand op operand        op in < <= = <> != >= >
//
// COUNT(col) is counted exactly like COUNT(*): the algebra has no nulls.

#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flexdp/catalog.hpp"
#include "flexdp/error.hpp"
#include "flexdp/relalg.hpp"
#include "flexdp/value.hpp"

namespace flexdp {

namespace sql_internal {

enum class TokenKind { kIdent, kQuotedIdent, kNumber, kString, kSymbol, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string text;
  std::size_t offset = 0;
};

inline std::string Upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<Token> Tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse, what + " at offset " + std::to_string(i));
  };
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < sql.size() &&
             (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '_')) {
        ++i;
      }
      tokens.push_back({TokenKind::kIdent, std::string(sql.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < sql.size() && (sql[i] == '.' || std::isalpha(static_cast<unsigned char>(sql[i])))) {
        fail("only integer literals are supported");
      }
      tokens.push_back({TokenKind::kNumber, std::string(sql.substr(start, i - start)), start});
    } else if (c == '\'' || c == '"') {
      const char quote = c;
      std::size_t start = i++;
      std::string text;
      for (;;) {
        if (i >= sql.size()) fail("unterminated quoted text");
        if (sql[i] == quote) {
          if (i + 1 < sql.size() && sql[i + 1] == quote) {
            text += quote;
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text += sql[i++];
      }
      tokens.push_back(
          {quote == '\'' ? TokenKind::kString : TokenKind::kQuotedIdent, std::move(text), start});
    } else {
      static constexpr std::string_view kTwoChar[] = {"<=", ">=", "<>", "!="};
      bool matched = false;
      for (auto two : kTwoChar) {
        if (sql.substr(i, 2) == two) {
          tokens.push_back({TokenKind::kSymbol, std::string(two), i});
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (std::string_view("(),.*=<>;-").find(c) == std::string_view::npos) {
        fail(std::string("unexpected character '") + c + "'");
      }
      tokens.push_back({TokenKind::kSymbol, std::string(1, c), i});
      ++i;
    }
  }
  tokens.push_back({TokenKind::kEnd, "", sql.size()});
  return tokens;
}

// A name visible in a FROM clause: `qualifier.name` maps to column `index`
// of the relation being built.
struct ScopeEntry {
  std::string qualifier;
  std::string name;
  std::size_t index;
  Provenance provenance;
};

struct Bound {
  RelPtr rel;
  std::vector<ScopeEntry> scope;
};

struct SelectItem {
  enum class Kind { kStar, kQualifiedStar, kCount, kColumn };
  Kind kind = Kind::kColumn;
  std::string qualifier;
  std::string name;
  std::string alias;
};

struct RawOperand {
  bool is_attr = false;
  std::string qualifier;
  std::string name;
  Value literal;
};

struct RawTerm {
  RawOperand lhs;
  CompareOp op = CompareOp::kEq;
  RawOperand rhs;
  std::string text;
};

class Parser {
 public:
  Parser(std::string_view sql, const Catalog& catalog)
      : tokens_(Tokenize(sql)), catalog_(catalog) {}

  RelPtr ParseQuery() {
    if (AcceptKeyword("WITH")) {
      do {
        std::string name = ExpectIdent("common table expression name");
        ExpectKeyword("AS");
        ExpectSymbol("(");
        RelPtr body = ParseSelect();
        ExpectSymbol(")");
        ctes_[name] = std::move(body);
      } while (AcceptSymbol(","));
    }
    RelPtr root = ParseSelect();
    AcceptSymbol(";");
    if (Peek().kind != TokenKind::kEnd) {
      Fail("unexpected trailing input '" + Peek().text + "'");
    }
    root = UnwrapCountProjection(root);
    if (!root->IsCountRoot()) {
      throw Error(ErrorCode::kUnsupportedQuery,
                  "outermost operation is not a count: " + ToString(*root));
    }
    return root;
  }

 private:
  // A projection that keeps every column of an inner count (for example
  // SELECT count FROM (SELECT COUNT(*) ...) c) makes the inner count the root.
  static RelPtr UnwrapCountProjection(const RelPtr& root) {
    const auto* project = root->As<ProjectNode>();
    if (project == nullptr || !project->input->IsCountRoot()) return root;
    const std::size_t width = project->input->schema().size();
    std::vector<bool> kept(width, false);
    for (const auto& a : project->attrs) kept[a.index] = true;
    for (bool k : kept) {
      if (!k) return root;
    }
    return project->input;
  }

  const Token& Peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& Next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void Fail(const std::string& message) const {
    throw Error(ErrorCode::kParse, message + " (at offset " + std::to_string(Peek().offset) + ")");
  }

  bool IsKeyword(const Token& t, std::string_view kw) const {
    return t.kind == TokenKind::kIdent && Upper(t.text) == kw;
  }
  bool AcceptKeyword(std::string_view kw) {
    if (IsKeyword(Peek(), kw)) {
      Next();
      return true;
    }
    return false;
  }
  void ExpectKeyword(std::string_view kw) {
    if (!AcceptKeyword(kw)) Fail("expected " + std::string(kw));
  }
  bool AcceptSymbol(std::string_view s) {
    if (Peek().kind == TokenKind::kSymbol && Peek().text == s) {
      Next();
      return true;
    }
    return false;
  }
  void ExpectSymbol(std::string_view s) {
    if (!AcceptSymbol(s)) Fail("expected '" + std::string(s) + "'");
  }

  static bool IsReserved(const std::string& word) {
    static const char* const kReserved[] = {
        "SELECT", "FROM",  "WHERE", "GROUP", "BY",    "JOIN", "INNER", "LEFT",   "RIGHT",
        "FULL",   "OUTER", "CROSS", "ON",    "AND",   "OR",   "NOT",   "AS",     "WITH",
        "ORDER",  "LIMIT", "HAVING", "UNION", "EXCEPT", "INTERSECT", "MINUS", "NATURAL",
        "USING"};
    const std::string up = Upper(word);
    for (const char* r : kReserved) {
      if (up == r) return true;
    }
    return false;
  }

  std::string ExpectIdent(const std::string& what) {
    const Token& t = Peek();
    if (t.kind == TokenKind::kQuotedIdent || (t.kind == TokenKind::kIdent && !IsReserved(t.text))) {
      return Next().text;
    }
    Fail("expected " + what);
  }

  bool PeekIdent() const {
    const Token& t = Peek();
    return t.kind == TokenKind::kQuotedIdent || (t.kind == TokenKind::kIdent && !IsReserved(t.text));
  }

  // --- SELECT ------------------------------------------------------------

  RelPtr ParseSelect() {
    ExpectKeyword("SELECT");
    if (AcceptKeyword("DISTINCT")) {
      throw Error(ErrorCode::kUnsupportedQuery, "SELECT DISTINCT is not supported");
    }
    std::vector<SelectItem> items;
    do {
      items.push_back(ParseSelectItem());
    } while (AcceptSymbol(","));

    ExpectKeyword("FROM");
    Bound bound = ParseFromClause();

    if (AcceptKeyword("WHERE")) {
      Predicate pred = BindPredicate(ParseCondition("WHERE clause"), bound.scope);
      bound.rel = RelExpr::Select(bound.rel, std::move(pred));
    }

    std::vector<AttrRef> group_attrs;
    bool grouped = false;
    if (AcceptKeyword("GROUP")) {
      ExpectKeyword("BY");
      grouped = true;
      do {
        auto [qualifier, name] = ParseColumnName();
        group_attrs.push_back(Resolve(bound.scope, qualifier, name));
      } while (AcceptSymbol(","));
    }
    for (const char* kw : {"HAVING", "ORDER", "LIMIT", "UNION", "EXCEPT", "INTERSECT", "MINUS"}) {
      if (IsKeyword(Peek(), kw)) {
        throw Error(ErrorCode::kUnsupportedQuery, std::string(kw) + " is not supported");
      }
    }
    return BuildOutput(std::move(bound), items, grouped, std::move(group_attrs));
  }

  SelectItem ParseSelectItem() {
    SelectItem item;
    if (AcceptSymbol("*")) {
      item.kind = SelectItem::Kind::kStar;
      return item;
    }
    if (Peek().kind == TokenKind::kIdent && Peek(1).kind == TokenKind::kSymbol &&
        Peek(1).text == "(") {
      const std::string fn = Upper(Peek().text);
      if (fn != "COUNT") {
        throw Error(ErrorCode::kUnsupportedQuery,
                    "aggregation " + fn + " is not supported; only COUNT is");
      }
      Next();
      Next();
      if (AcceptKeyword("DISTINCT")) {
        throw Error(ErrorCode::kUnsupportedQuery, "COUNT(DISTINCT ...) is not supported");
      }
      if (!AcceptSymbol("*")) {
        auto [qualifier, name] = ParseColumnName();
        item.qualifier = qualifier;
        item.name = name;
      }
      ExpectSymbol(")");
      item.kind = SelectItem::Kind::kCount;
    } else {
      std::string first = ExpectIdent("column name");
      if (AcceptSymbol(".")) {
        if (AcceptSymbol("*")) {
          item.kind = SelectItem::Kind::kQualifiedStar;
          item.qualifier = first;
          return item;
        }
        item.qualifier = first;
        item.name = ExpectIdent("column name");
      } else {
        item.name = first;
      }
      item.kind = SelectItem::Kind::kColumn;
    }
    if (AcceptKeyword("AS")) {
      item.alias = ExpectIdent("alias");
    } else if (PeekIdent()) {
      item.alias = Next().text;
    }
    return item;
  }

  std::pair<std::string, std::string> ParseColumnName() {
    std::string first = ExpectIdent("column name");
    if (AcceptSymbol(".")) return {first, ExpectIdent("column name")};
    return {"", first};
  }

  RelPtr BuildOutput(Bound bound, const std::vector<SelectItem>& items, bool grouped,
                     std::vector<AttrRef> group_attrs) {
    std::size_t counts = 0;
    std::string count_name = "count";
    for (const auto& item : items) {
      if (item.kind == SelectItem::Kind::kCount) {
        ++counts;
        if (!item.name.empty()) Resolve(bound.scope, item.qualifier, item.name);
        if (!item.alias.empty()) count_name = item.alias;
      }
    }
    if (counts > 1) {
      throw Error(ErrorCode::kUnsupportedQuery, "more than one COUNT in a select list");
    }
    if (counts == 1) {
      if (!grouped) {
        if (items.size() != 1) {
          Fail("non-aggregated column in a COUNT query without GROUP BY");
        }
        return RelExpr::Count(bound.rel, count_name);
      }
      for (const auto& item : items) {
        if (item.kind == SelectItem::Kind::kCount) continue;
        if (item.kind != SelectItem::Kind::kColumn) Fail("'*' cannot be combined with GROUP BY");
        AttrRef a = Resolve(bound.scope, item.qualifier, item.name);
        bool found = false;
        for (const auto& g : group_attrs) found = found || g.index == a.index;
        if (!found) Fail("column '" + a.name + "' must appear in GROUP BY");
      }
      return RelExpr::CountGrouped(bound.rel, std::move(group_attrs), count_name);
    }
    if (grouped) {
      throw Error(ErrorCode::kUnsupportedQuery, "GROUP BY without COUNT is not supported");
    }
    // Plain projection.
    std::vector<AttrRef> attrs;
    std::vector<std::string> names;
    for (const auto& item : items) {
      switch (item.kind) {
        case SelectItem::Kind::kStar:
          for (const auto& e : bound.scope) {
            attrs.push_back({e.qualifier + "." + e.name, e.index, e.provenance});
            names.push_back(e.name);
          }
          break;
        case SelectItem::Kind::kQualifiedStar: {
          bool any = false;
          for (const auto& e : bound.scope) {
            if (e.qualifier != item.qualifier) continue;
            attrs.push_back({e.qualifier + "." + e.name, e.index, e.provenance});
            names.push_back(e.name);
            any = true;
          }
          if (!any) {
            throw Error(ErrorCode::kUnresolvedAttribute,
                        "unknown table or alias '" + item.qualifier + "'");
          }
          break;
        }
        case SelectItem::Kind::kColumn: {
          AttrRef a = Resolve(bound.scope, item.qualifier, item.name);
          names.push_back(item.alias.empty() ? item.name : item.alias);
          attrs.push_back(std::move(a));
          break;
        }
        case SelectItem::Kind::kCount:
          break;
      }
    }
    return RelExpr::Project(bound.rel, std::move(attrs), std::move(names));
  }

  // --- FROM --------------------------------------------------------------

  Bound ParseSource() {
    if (AcceptSymbol("(")) {
      RelPtr sub = ParseSelect();
      ExpectSymbol(")");
      AcceptKeyword("AS");
      std::string alias = ExpectIdent("alias for a subquery");
      return Scoped(std::move(sub), alias);
    }
    std::string name = ExpectIdent("table name");
    std::string alias = name;
    if (AcceptKeyword("AS")) {
      alias = ExpectIdent("alias");
    } else if (PeekIdent()) {
      alias = Next().text;
    }
    if (auto it = ctes_.find(name); it != ctes_.end()) return Scoped(it->second, alias);
    if (!catalog_.HasTable(name)) {
      throw Error(ErrorCode::kUnknownTable, "unknown table '" + name + "'");
    }
    return Scoped(RelExpr::Table(catalog_, name, alias), alias);
  }

  static Bound Scoped(RelPtr rel, const std::string& alias) {
    Bound b{std::move(rel), {}};
    for (std::size_t i = 0; i < b.rel->schema().size(); ++i) {
      const Column& c = b.rel->schema()[i];
      b.scope.push_back({alias, c.name, i, c.provenance});
    }
    return b;
  }

  Bound ParseFromClause() {
    Bound left = ParseSource();
    for (;;) {
      if (AcceptSymbol(",")) {
        throw Error(ErrorCode::kUnsupportedQuery,
                    "comma (cross) joins are not supported; use JOIN ... ON");
      }
      for (const char* kw : {"LEFT", "RIGHT", "FULL", "CROSS", "NATURAL"}) {
        if (IsKeyword(Peek(), kw)) {
          throw Error(ErrorCode::kUnsupportedQuery,
                      std::string(kw) + " JOIN is not supported; only inner equijoins are");
        }
      }
      const bool inner = AcceptKeyword("INNER");
      if (!AcceptKeyword("JOIN")) {
        if (inner) Fail("expected JOIN");
        return left;
      }
      Bound right = ParseSource();
      ExpectKeyword("ON");
      std::vector<RawTerm> terms = ParseCondition("join condition");
      left = BindJoin(std::move(left), std::move(right), terms);
    }
  }

  Bound BindJoin(Bound left, Bound right, const std::vector<RawTerm>& terms) {
    const std::size_t offset = left.rel->schema().size();
    std::vector<ScopeEntry> scope = left.scope;
    for (auto e : right.scope) {
      e.index += offset;
      scope.push_back(std::move(e));
    }
    Predicate all = BindPredicate(terms, scope);

    std::optional<std::size_t> chosen;
    std::string derived_key;
    for (std::size_t i = 0; i < all.terms.size() && !chosen; ++i) {
      const Comparison& c = all.terms[i];
      const auto* rhs = std::get_if<AttrRef>(&c.rhs);
      if (c.op != CompareOp::kEq || rhs == nullptr) continue;
      const bool crosses = (c.lhs.index < offset) != (rhs->index < offset);
      if (!crosses) continue;
      for (const AttrRef* side : {&c.lhs, rhs}) {
        if (!IsBaseColumn(side->provenance) && derived_key.empty()) derived_key = side->name;
      }
      if (IsBaseColumn(c.lhs.provenance) && IsBaseColumn(rhs->provenance)) chosen = i;
    }
    if (!chosen) {
      if (!derived_key.empty()) {
        throw Error(ErrorCode::kUnsupportedQuery,
                    "join key '" + derived_key +
                        "' is not drawn from an original table (it is computed by an "
                        "aggregation in a subquery)");
      }
      std::string shown;
      for (const auto& t : terms) shown += (shown.empty() ? "" : " AND ") + t.text;
      throw Error(ErrorCode::kUnsupportedQuery,
                  "join condition '" + shown + "' has no equijoin term (non-equijoin)");
    }
    Comparison key = all.terms[*chosen];
    AttrRef a = key.lhs;
    AttrRef b = std::get<AttrRef>(key.rhs);
    if (a.index >= offset) std::swap(a, b);
    b.index -= offset;
    Predicate residual;
    for (std::size_t i = 0; i < all.terms.size(); ++i) {
      if (i != *chosen) residual.terms.push_back(all.terms[i]);
    }
    Bound out;
    out.rel = RelExpr::Join(left.rel, right.rel, std::move(a), std::move(b), std::move(residual));
    out.scope = std::move(scope);
    return out;
  }

  // --- predicates --------------------------------------------------------

  std::vector<RawTerm> ParseCondition(const std::string& where) {
    std::vector<RawTerm> terms;
    ParseConjunction(terms, where);
    return terms;
  }

  void ParseConjunction(std::vector<RawTerm>& terms, const std::string& where) {
    do {
      if (AcceptKeyword("NOT")) {
        throw Error(ErrorCode::kUnsupportedQuery, "NOT in " + where + " is not supported");
      }
      if (AcceptSymbol("(")) {
        ParseConjunction(terms, where);
        ExpectSymbol(")");
      } else {
        terms.push_back(ParseTerm());
      }
      if (IsKeyword(Peek(), "OR")) {
        throw Error(ErrorCode::kUnsupportedQuery,
                    "disjunction (OR) in " + where + " is not supported");
      }
    } while (AcceptKeyword("AND"));
  }

  RawOperand ParseOperand() {
    RawOperand o;
    const Token& t = Peek();
    if (t.kind == TokenKind::kString) {
      o.literal = Next().text;
      return o;
    }
    bool negative = false;
    if (AcceptSymbol("-")) negative = true;
    if (Peek().kind == TokenKind::kNumber) {
      std::string digits = (negative ? "-" : "") + Next().text;
      Value v = ParseValue(digits);
      if (!std::holds_alternative<std::int64_t>(v)) Fail("integer literal out of range");
      o.literal = v;
      return o;
    }
    if (negative) Fail("expected a number after '-'");
    auto [qualifier, name] = ParseColumnName();
    o.is_attr = true;
    o.qualifier = qualifier;
    o.name = name;
    return o;
  }

  static std::string OperandText(const RawOperand& o) {
    if (o.is_attr) return o.qualifier.empty() ? o.name : o.qualifier + "." + o.name;
    if (std::holds_alternative<std::string>(o.literal)) return "'" + ToString(o.literal) + "'";
    return ToString(o.literal);
  }

  RawTerm ParseTerm() {
    RawTerm term;
    term.lhs = ParseOperand();
    const Token& t = Peek();
    static const std::pair<std::string_view, CompareOp> kOps[] = {
        {"<", CompareOp::kLt},  {"<=", CompareOp::kLe}, {"=", CompareOp::kEq},
        {"<>", CompareOp::kNe}, {"!=", CompareOp::kNe}, {">=", CompareOp::kGe},
        {">", CompareOp::kGt}};
    bool matched = false;
    if (t.kind == TokenKind::kSymbol) {
      for (const auto& [sym, op] : kOps) {
        if (t.text == sym) {
          term.op = op;
          matched = true;
        }
      }
    }
    if (!matched) Fail("expected a comparison operator");
    Next();
    term.rhs = ParseOperand();
    term.text = OperandText(term.lhs) + " " + std::string(OpSymbol(term.op)) + " " +
                OperandText(term.rhs);
    return term;
  }

  Predicate BindPredicate(const std::vector<RawTerm>& terms,
                          const std::vector<ScopeEntry>& scope) const {
    Predicate pred;
    for (const auto& t : terms) {
      if (!t.lhs.is_attr && !t.rhs.is_attr) Fail("comparison between two literals");
      Comparison c;
      const RawOperand* attr_side = &t.lhs;
      const RawOperand* other = &t.rhs;
      c.op = t.op;
      if (!t.lhs.is_attr) {
        std::swap(attr_side, other);
        c.op = Mirror(t.op);
      }
      c.lhs = Resolve(scope, attr_side->qualifier, attr_side->name);
      if (other->is_attr) {
        c.rhs = Resolve(scope, other->qualifier, other->name);
      } else {
        c.rhs = other->literal;
      }
      pred.terms.push_back(std::move(c));
    }
    return pred;
  }

  AttrRef Resolve(const std::vector<ScopeEntry>& scope, const std::string& qualifier,
                  const std::string& name) const {
    const ScopeEntry* found = nullptr;
    bool qualifier_seen = false;
    for (const auto& e : scope) {
      if (!qualifier.empty()) {
        if (e.qualifier != qualifier) continue;
        qualifier_seen = true;
      }
      if (e.name != name) continue;
      if (found != nullptr) {
        Fail("ambiguous column reference '" + name + "'");
      }
      found = &e;
    }
    if (found == nullptr) {
      if (!qualifier.empty() && !qualifier_seen) {
        throw Error(ErrorCode::kUnresolvedAttribute, "unknown table or alias '" + qualifier + "'");
      }
      throw Error(ErrorCode::kUnknownColumn,
                  "unknown column '" + (qualifier.empty() ? name : qualifier + "." + name) + "'");
    }
    return AttrRef{found->qualifier + "." + found->name, found->index, found->provenance};
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Catalog& catalog_;
  std::map<std::string, RelPtr> ctes_;
};

}  // namespace sql_internal

// Parses one counting query. Throws Error with kParse, kUnsupportedQuery,
// kUnknownTable, kUnknownColumn or kUnresolvedAttribute.
inline RelPtr ParseQuery(std::string_view sql, const Catalog& catalog) {
  return sql_internal::Parser(sql, catalog).ParseQuery();
}

}  // namespace flexdp

#endif  // FLEXDP_SQL_PARSER_HPP_
