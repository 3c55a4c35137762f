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
#ifndef FLEXDP_BUDGET_HPP_
#define FLEXDP_BUDGET_HPP_

#include <cmath>
#include <cstdio>
#include <string>

#include "flexdp/error.hpp"
#include "flexdp/smooth.hpp"

namespace flexdp {

// Sequential composition: epsilons and deltas add up until a configured
// maximum, after which every further charge is refused.
class BudgetLedger {
 public:
  BudgetLedger(double max_epsilon, double max_delta, double spent_epsilon = 0,
               double spent_delta = 0)
      : max_epsilon_(max_epsilon),
        max_delta_(max_delta),
        spent_epsilon_(spent_epsilon),
        spent_delta_(spent_delta) {
    if (!(max_epsilon > 0) || !std::isfinite(max_epsilon)) {
      throw Error(ErrorCode::kInvalidParams, "budget epsilon must be positive");
    }
    if (!(max_delta > 0 && max_delta < 1)) {
      throw Error(ErrorCode::kInvalidParams, "budget delta must lie in (0, 1)");
    }
    if (!(spent_epsilon >= 0) || !(spent_delta >= 0)) {
      throw Error(ErrorCode::kInvalidParams, "spent budget cannot be negative");
    }
  }

  double max_epsilon() const { return max_epsilon_; }
  double max_delta() const { return max_delta_; }
  double spent_epsilon() const { return spent_epsilon_; }
  double spent_delta() const { return spent_delta_; }

  bool CanAfford(double epsilon, double delta) const {
    return Within(spent_epsilon_ + epsilon, max_epsilon_) && Within(spent_delta_ + delta, max_delta_);
  }

  // Leaves the ledger untouched when the charge is refused.
  void Charge(double epsilon, double delta) {
    if (!CanAfford(epsilon, delta)) {
      throw Error(ErrorCode::kBudgetExhausted,
                  "privacy budget exhausted: spent (epsilon " + std::to_string(spent_epsilon_) +
                      ", delta " + Format(spent_delta_) + ") of (" +
                      std::to_string(max_epsilon_) + ", " + Format(max_delta_) +
                      "); refusing to answer");
    }
    spent_epsilon_ += epsilon;
    spent_delta_ += delta;
  }

  void Charge(const PrivacyParams& p) { Charge(p.epsilon, p.delta); }

 private:
  // Sums such as 0.1 + 0.2 land a few ulps above the decimal maximum.
  static bool Within(double total, double max) { return total <= max * (1 + 1e-12); }

  static std::string Format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
  }

  double max_epsilon_;
  double max_delta_;
  double spent_epsilon_;
  double spent_delta_;
};

}  // namespace flexdp

#endif  // FLEXDP_BUDGET_HPP_
