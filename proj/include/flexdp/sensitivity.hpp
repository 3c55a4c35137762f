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
#ifndef FLEXDP_SENSITIVITY_HPP_
#define FLEXDP_SENSITIVITY_HPP_

// Elastic stability and elastic sensitivity of counting queries.
//
// One recursion, parameterized by an algebra, serves every consumer:
//   ExactAlgebra     the bound at a fixed distance k, in exact integers
//   EnvelopeAlgebra  the bound as a function of k: a maximum of polynomials
//                    with non-negative coefficients
//   TapeAlgebra      a straight-line program evaluated cheaply at many k
// Public tables contribute stability 0 and their mf is not inflated by k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "flexdp/error.hpp"
#include "flexdp/metrics.hpp"
#include "flexdp/polynomial.hpp"
#include "flexdp/relalg.hpp"

namespace flexdp {

using StabilityValue = BigInt;

// Max frequency at distance k: a count, or bottom when the attribute comes
// out of an aggregation and no metric can describe it.
struct MfValue {
  std::optional<BigInt> count;

  bool IsBottom() const { return !count.has_value(); }
  friend bool operator==(const MfValue&, const MfValue&) = default;
};

struct ExactAlgebra {
  using Scalar = BigInt;
  std::uint64_t k = 0;

  Scalar Constant(std::uint64_t c) const { return c; }
  Scalar Distance() const { return k; }
  static Scalar Add(const Scalar& a, const Scalar& b) { return a + b; }
  static Scalar Mul(const Scalar& a, const Scalar& b) { return a * b; }
  static Scalar Max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }
};

// Upper envelope of polynomials in k. Pieces dominated coefficient-wise by
// another piece are dropped; every piece has non-negative coefficients.
class PolynomialEnvelope {
 public:
  PolynomialEnvelope() = default;
  explicit PolynomialEnvelope(Polynomial p) : pieces_{std::move(p)} {}

  const std::vector<Polynomial>& pieces() const { return pieces_; }

  BigInt Evaluate(std::uint64_t k) const {
    BigInt best = 0;
    for (const auto& p : pieces_) best = std::max(best, p.Evaluate(k));
    return best;
  }

  std::size_t Degree() const {
    std::size_t d = 0;
    for (const auto& p : pieces_) d = std::max(d, p.Degree());
    return d;
  }

  friend PolynomialEnvelope operator+(const PolynomialEnvelope& a, const PolynomialEnvelope& b) {
    return Combine(a, b, [](const Polynomial& x, const Polynomial& y) { return x + y; });
  }
  friend PolynomialEnvelope operator*(const PolynomialEnvelope& a, const PolynomialEnvelope& b) {
    return Combine(a, b, [](const Polynomial& x, const Polynomial& y) { return x * y; });
  }
  static PolynomialEnvelope Max(const PolynomialEnvelope& a, const PolynomialEnvelope& b) {
    PolynomialEnvelope out;
    out.pieces_ = a.pieces_;
    out.pieces_.insert(out.pieces_.end(), b.pieces_.begin(), b.pieces_.end());
    out.Prune();
    return out;
  }

 private:
  static bool Dominates(const Polynomial& a, const Polynomial& b) {
    const std::size_t n = std::max(a.coefficients().size(), b.coefficients().size());
    for (std::size_t i = 0; i < n; ++i) {
      if (a.Coefficient(i) < b.Coefficient(i)) return false;
    }
    return true;
  }

  template <class F>
  static PolynomialEnvelope Combine(const PolynomialEnvelope& a, const PolynomialEnvelope& b,
                                    F op) {
    PolynomialEnvelope out;
    for (const auto& x : a.pieces_) {
      for (const auto& y : b.pieces_) out.pieces_.push_back(op(x, y));
    }
    out.Prune();
    return out;
  }

  void Prune() {
    std::vector<Polynomial> kept;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < pieces_.size() && !dominated; ++j) {
        if (i == j || !Dominates(pieces_[j], pieces_[i])) continue;
        // Equal pieces: keep the first copy only.
        dominated = !(pieces_[j] == pieces_[i]) || j < i;
      }
      if (!dominated) kept.push_back(pieces_[i]);
    }
    pieces_ = std::move(kept);
  }

  std::vector<Polynomial> pieces_;
};

struct EnvelopeAlgebra {
  using Scalar = PolynomialEnvelope;

  Scalar Constant(std::uint64_t c) const { return Scalar(Polynomial(BigInt(c))); }
  Scalar Distance() const { return Scalar(Polynomial::Variable()); }
  static Scalar Add(const Scalar& a, const Scalar& b) { return a + b; }
  static Scalar Mul(const Scalar& a, const Scalar& b) { return a * b; }
  static Scalar Max(const Scalar& a, const Scalar& b) { return Scalar::Max(a, b); }
};

// Straight-line program over {constant, k, +, *, max}. Every value it
// computes is non-negative, so double evaluation loses only a few ulps per
// operation; LogEvaluate covers results beyond double range.
class SensitivityTape {
 public:
  enum class Op { kConstant, kDistance, kAdd, kMul, kMax };
  struct Instruction {
    Op op;
    double constant;
    std::uint32_t a;
    std::uint32_t b;
  };

  std::uint32_t Push(Instruction instr) {
    code_.push_back(instr);
    return static_cast<std::uint32_t>(code_.size() - 1);
  }
  void SetResult(std::uint32_t slot) { result_ = slot; }
  std::size_t size() const { return code_.size(); }

  double Evaluate(std::uint64_t k) const {
    scratch_.resize(code_.size());
    const double x = static_cast<double>(k);
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Instruction& in = code_[i];
      switch (in.op) {
        case Op::kConstant: scratch_[i] = in.constant; break;
        case Op::kDistance: scratch_[i] = x; break;
        case Op::kAdd: scratch_[i] = scratch_[in.a] + scratch_[in.b]; break;
        case Op::kMul: scratch_[i] = scratch_[in.a] * scratch_[in.b]; break;
        case Op::kMax: scratch_[i] = std::max(scratch_[in.a], scratch_[in.b]); break;
      }
    }
    return scratch_[result_];
  }

  // Natural log of the program's value at k; -inf when the value is 0.
  double LogEvaluate(std::uint64_t k) const {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    scratch_.resize(code_.size());
    const double lx = k == 0 ? kNegInf : std::log(static_cast<double>(k));
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Instruction& in = code_[i];
      switch (in.op) {
        case Op::kConstant:
          scratch_[i] = in.constant == 0 ? kNegInf : std::log(in.constant);
          break;
        case Op::kDistance: scratch_[i] = lx; break;
        case Op::kAdd: {
          const double hi = std::max(scratch_[in.a], scratch_[in.b]);
          const double lo = std::min(scratch_[in.a], scratch_[in.b]);
          scratch_[i] = hi == kNegInf ? kNegInf : hi + std::log1p(std::exp(lo - hi));
          break;
        }
        case Op::kMul:
          scratch_[i] = (scratch_[in.a] == kNegInf || scratch_[in.b] == kNegInf)
                            ? kNegInf
                            : scratch_[in.a] + scratch_[in.b];
          break;
        case Op::kMax: scratch_[i] = std::max(scratch_[in.a], scratch_[in.b]); break;
      }
    }
    return scratch_[result_];
  }

 private:
  std::vector<Instruction> code_;
  std::uint32_t result_ = 0;
  mutable std::vector<double> scratch_;
};

struct TapeAlgebra {
  using Scalar = std::uint32_t;
  SensitivityTape* tape;

  Scalar Constant(std::uint64_t c) const {
    return tape->Push({SensitivityTape::Op::kConstant, static_cast<double>(c), 0, 0});
  }
  Scalar Distance() const { return tape->Push({SensitivityTape::Op::kDistance, 0, 0, 0}); }
  Scalar Add(Scalar a, Scalar b) const { return tape->Push({SensitivityTape::Op::kAdd, 0, a, b}); }
  Scalar Mul(Scalar a, Scalar b) const { return tape->Push({SensitivityTape::Op::kMul, 0, a, b}); }
  Scalar Max(Scalar a, Scalar b) const { return tape->Push({SensitivityTape::Op::kMax, 0, a, b}); }
};

// The elastic stability / sensitivity recursion, memoized per subexpression
// for the lifetime of the evaluator (one distance or one symbolic pass).
template <class Algebra>
class ElasticEvaluator {
 public:
  using Scalar = typename Algebra::Scalar;

  ElasticEvaluator(const MetricsStore& metrics, Algebra algebra)
      : metrics_(metrics), algebra_(std::move(algebra)) {}

  // mf_k of output column `column` of `r`; nullopt is bottom.
  std::optional<Scalar> MaxFrequency(const RelExpr& r, std::size_t column) {
    auto key = std::make_pair(&r, column);
    if (auto it = mf_memo_.find(key); it != mf_memo_.end()) return it->second;
    std::optional<Scalar> result = ComputeMaxFrequency(r, column);
    mf_memo_.emplace(key, result);
    return result;
  }

  Scalar Stability(const RelExpr& r) {
    if (auto it = stability_memo_.find(&r); it != stability_memo_.end()) return it->second;
    Scalar result = ComputeStability(r);
    stability_memo_.emplace(&r, result);
    return result;
  }

  Scalar Sensitivity(const RelExpr& q) {
    if (const auto* count = q.As<CountNode>()) return Stability(*count->input);
    if (const auto* grouped = q.As<CountGroupedNode>()) {
      return algebra_.Mul(algebra_.Constant(2), Stability(*grouped->input));
    }
    throw Error(ErrorCode::kUnsupportedQuery, "query root is not a count: " + ToString(q));
  }

 private:
  std::optional<Scalar> ComputeMaxFrequency(const RelExpr& r, std::size_t column) {
    if (column >= r.schema().size()) {
      throw Error(ErrorCode::kUnresolvedAttribute,
                  "column index " + std::to_string(column) + " is not in scope");
    }
    return std::visit(
        [&](const auto& n) -> std::optional<Scalar> {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, TableNode>) {
            Scalar base =
                algebra_.Constant(metrics_.RequireMaxFrequency(n.table, r.schema()[column].name));
            if (metrics_.IsPublic(n.table)) return base;
            return algebra_.Add(base, algebra_.Distance());
          } else if constexpr (std::is_same_v<T, JoinNode>) {
            // mf of the attribute on its own side times mf of the opposite
            // side's join key.
            const std::size_t left_width = n.left->schema().size();
            std::optional<Scalar> own;
            std::optional<Scalar> opposite_key;
            if (column < left_width) {
              own = MaxFrequency(*n.left, column);
              opposite_key = MaxFrequency(*n.right, n.key_right.index);
            } else {
              own = MaxFrequency(*n.right, column - left_width);
              opposite_key = MaxFrequency(*n.left, n.key_left.index);
            }
            if (!own || !opposite_key) return std::nullopt;
            return algebra_.Mul(*own, *opposite_key);
          } else if constexpr (std::is_same_v<T, ProjectNode>) {
            return MaxFrequency(*n.input, n.attrs[column].index);
          } else if constexpr (std::is_same_v<T, SelectNode>) {
            return MaxFrequency(*n.input, column);
          } else {
            return std::nullopt;
          }
        },
        r.node());
  }

  Scalar KeyFrequency(const RelExpr& side, const AttrRef& key) {
    auto mf = MaxFrequency(side, key.index);
    if (!mf) {
      throw Error(ErrorCode::kUnsupportedQuery,
                  "cannot bound the frequency of join key '" + key.name +
                      "': it is produced by an aggregation");
    }
    return *mf;
  }

  const std::set<std::string>& AncestorsOf(const RelExpr& r) {
    auto it = ancestors_memo_.find(&r);
    if (it == ancestors_memo_.end()) it = ancestors_memo_.emplace(&r, Ancestors(r)).first;
    return it->second;
  }

  bool Overlaps(const RelExpr& a, const RelExpr& b) {
    const auto& left = AncestorsOf(a);
    for (const auto& t : AncestorsOf(b)) {
      if (left.count(t)) return true;
    }
    return false;
  }

  Scalar ComputeStability(const RelExpr& r) {
    return std::visit(
        [&](const auto& n) -> Scalar {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, TableNode>) {
            return algebra_.Constant(metrics_.IsPublic(n.table) ? 0 : 1);
          } else if constexpr (std::is_same_v<T, JoinNode>) {
            const Scalar mf_left = KeyFrequency(*n.left, n.key_left);
            const Scalar mf_right = KeyFrequency(*n.right, n.key_right);
            const Scalar s_left = Stability(*n.left);
            const Scalar s_right = Stability(*n.right);
            const Scalar via_right = algebra_.Mul(mf_left, s_right);
            const Scalar via_left = algebra_.Mul(mf_right, s_left);
            if (Overlaps(*n.left, *n.right)) {
              return algebra_.Add(algebra_.Add(via_right, via_left),
                                  algebra_.Mul(s_left, s_right));
            }
            return algebra_.Max(via_right, via_left);
          } else if constexpr (std::is_same_v<T, ProjectNode> || std::is_same_v<T, SelectNode>) {
            return Stability(*n.input);
          } else if constexpr (std::is_same_v<T, CountNode>) {
            return algebra_.Constant(1);
          } else {
            return algebra_.Mul(algebra_.Constant(2), Stability(*n.input));
          }
        },
        r.node());
  }

  const MetricsStore& metrics_;
  Algebra algebra_;
  std::map<const RelExpr*, Scalar> stability_memo_;
  std::map<std::pair<const RelExpr*, std::size_t>, std::optional<Scalar>> mf_memo_;
  std::map<const RelExpr*, std::set<std::string>> ancestors_memo_;
};

inline MfValue MfAtDistance(const RelExpr& r, std::size_t column, std::uint64_t k,
                            const MetricsStore& metrics) {
  ElasticEvaluator<ExactAlgebra> eval(metrics, ExactAlgebra{k});
  return MfValue{eval.MaxFrequency(r, column)};
}

inline MfValue MfAtDistance(const AttrRef& a, const RelExpr& r, std::uint64_t k,
                            const MetricsStore& metrics) {
  ResolveAttribute(a, r);
  return MfAtDistance(r, a.index, k, metrics);
}

inline StabilityValue ElasticStability(const RelExpr& r, std::uint64_t k,
                                       const MetricsStore& metrics) {
  return ElasticEvaluator<ExactAlgebra>(metrics, ExactAlgebra{k}).Stability(r);
}

inline StabilityValue ElasticSensitivity(const RelExpr& q, std::uint64_t k,
                                         const MetricsStore& metrics) {
  return ElasticEvaluator<ExactAlgebra>(metrics, ExactAlgebra{k}).Sensitivity(q);
}

// Elastic stability of `r` as a function of k.
inline PolynomialEnvelope StabilityEnvelope(const RelExpr& r, const MetricsStore& metrics) {
  return ElasticEvaluator<EnvelopeAlgebra>(metrics, EnvelopeAlgebra{}).Stability(r);
}

// Elastic sensitivity of `q` as a function of k.
inline PolynomialEnvelope SensitivityEnvelope(const RelExpr& q, const MetricsStore& metrics) {
  return ElasticEvaluator<EnvelopeAlgebra>(metrics, EnvelopeAlgebra{}).Sensitivity(q);
}

inline SensitivityTape CompileSensitivity(const RelExpr& q, const MetricsStore& metrics) {
  SensitivityTape tape;
  ElasticEvaluator<TapeAlgebra> eval(metrics, TapeAlgebra{&tape});
  tape.SetResult(eval.Sensitivity(q));
  return tape;
}

}  // namespace flexdp

#endif  // FLEXDP_SENSITIVITY_HPP_
