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
#ifndef FLEXDP_POLYNOMIAL_HPP_
#define FLEXDP_POLYNOMIAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace flexdp {

using BigInt = boost::multiprecision::cpp_int;

// Natural log of a positive integer of any size.
inline double LogOfBigInt(const BigInt& c) {
  const std::size_t bits = boost::multiprecision::msb(c) + 1;
  if (bits <= 1000) return std::log(c.convert_to<double>());
  const std::size_t shift = bits - 64;
  BigInt top = c >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

// Univariate polynomial in the distance k with exact integer coefficients,
// lowest degree first. The zero polynomial has no coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(BigInt constant) {  // NOLINT(google-explicit-constructor)
    if (constant != 0) coeffs_.push_back(std::move(constant));
  }
  Polynomial(std::uint64_t constant) : Polynomial(BigInt(constant)) {}  // NOLINT
  Polynomial(int constant) : Polynomial(BigInt(constant)) {}            // NOLINT

  explicit Polynomial(std::vector<BigInt> coeffs) : coeffs_(std::move(coeffs)) { Trim(); }

  // The polynomial k.
  static Polynomial Variable() { return Polynomial(std::vector<BigInt>{0, 1}); }

  const std::vector<BigInt>& coefficients() const { return coeffs_; }

  BigInt Coefficient(std::size_t power) const {
    return power < coeffs_.size() ? coeffs_[power] : BigInt(0);
  }

  // Degree; 0 for constants including zero.
  std::size_t Degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }
  bool IsZero() const { return coeffs_.empty(); }

  BigInt Evaluate(std::uint64_t k) const {
    BigInt acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * k + *it;
    return acc;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<BigInt> out(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) out[i] += a.coeffs_[i];
    for (std::size_t i = 0; i < b.coeffs_.size(); ++i) out[i] += b.coeffs_[i];
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.IsZero() || b.IsZero()) return {};
    std::vector<BigInt> out(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return Polynomial(std::move(out));
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

  std::string ToString() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (std::size_t p = coeffs_.size(); p-- > 0;) {
      if (coeffs_[p] == 0) continue;
      if (!first) os << " + ";
      first = false;
      if (p == 0 || coeffs_[p] != 1) os << coeffs_[p];
      if (p >= 1) os << 'k';
      if (p >= 2) os << '^' << p;
    }
    return os.str();
  }

 private:
  void Trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }

  std::vector<BigInt> coeffs_;
};

}  // namespace flexdp

#endif  // FLEXDP_POLYNOMIAL_HPP_
