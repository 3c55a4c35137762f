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
#ifndef FLEXDP_SMOOTH_HPP_
#define FLEXDP_SMOOTH_HPP_

// Privacy parameters and the smoothed elastic sensitivity
//
//   S = max_k e^(-beta k) * elastic_sensitivity(q, k),
//   beta = epsilon / (2 ln(2 / delta)).
//
// The elastic sensitivity grows polynomially in k with degree at most j^2
// for a query with j joins, so e^(-beta k) times it is non-increasing once
// k >= j^2 / beta; scanning k = 0 .. ceil(j^2 / beta) finds the maximum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "flexdp/error.hpp"
#include "flexdp/metrics.hpp"
#include "flexdp/polynomial.hpp"
#include "flexdp/relalg.hpp"
#include "flexdp/sensitivity.hpp"

namespace flexdp {

struct PrivacyParams {
  double epsilon = 0;
  double delta = 0;
  double beta = 0;

  // When `delta` is absent it defaults to n^(-epsilon ln n) for database size n.
  static PrivacyParams Make(double epsilon, std::optional<double> delta,
                            std::optional<std::uint64_t> n = std::nullopt) {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) {
      throw Error(ErrorCode::kInvalidParams, "epsilon must be positive and finite");
    }
    PrivacyParams p;
    p.epsilon = epsilon;
    if (delta) {
      p.delta = *delta;
    } else {
      if (!n || *n < 2) {
        throw Error(ErrorCode::kInvalidParams,
                    "delta was not given and the database size n (>= 2) is unknown");
      }
      const double ln_n = std::log(static_cast<double>(*n));
      p.delta = std::exp(-epsilon * ln_n * ln_n);
    }
    if (!(p.delta > 0 && p.delta < 1)) {
      throw Error(ErrorCode::kInvalidParams,
                  "delta must lie in (0, 1), got " + std::to_string(p.delta));
    }
    p.beta = p.epsilon / (2 * std::log(2 / p.delta));
    return p;
  }
};

struct SmoothBound {
  double smooth_sensitivity = 0;  // S
  std::uint64_t k_star = 0;
  std::uint64_t k_max = 0;
  std::uint64_t values_scanned = 0;
  double beta = 0;
  StabilityValue sensitivity_at_k_star = 0;
};

// max(1, ceil(j^2 / beta)).
inline std::uint64_t SearchBound(std::size_t joins, double beta) {
  const double bound = std::ceil(static_cast<double>(joins) * static_cast<double>(joins) / beta);
  if (!(bound < 9.0e18)) {
    throw Error(ErrorCode::kInvalidParams, "smoothing search bound overflows; beta is too small");
  }
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(bound));
}

// Scans k = 0 .. k_max comparing ln(sensitivity(k)) - beta k, so values far
// beyond double range still rank correctly. Ties go to the smaller k.
// `log_sensitivity(k)` returns the natural log of the bound at k (-inf for 0).
template <class LogSensitivity>
SmoothBound ScanSmoothBound(LogSensitivity&& log_sensitivity, double beta, std::uint64_t k_max) {
  SmoothBound out;
  out.beta = beta;
  out.k_max = k_max;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    const double score = log_sensitivity(k) - beta * static_cast<double>(k);
    ++out.values_scanned;
    if (score > best) {
      best = score;
      out.k_star = k;
    }
  }
  out.smooth_sensitivity = std::exp(best);
  return out;
}

inline SmoothBound ComputeSmoothBound(const RelExpr& q, const MetricsStore& metrics,
                                      const PrivacyParams& params) {
  const SensitivityTape tape = CompileSensitivity(q, metrics);
  const std::uint64_t k_max = SearchBound(JoinCount(q), params.beta);
  SmoothBound out = ScanSmoothBound(
      [&tape](std::uint64_t k) {
        const double v = tape.Evaluate(k);
        if (v == 0) return -std::numeric_limits<double>::infinity();
        return std::isfinite(v) ? std::log(v) : tape.LogEvaluate(k);
      },
      params.beta, k_max);
  // Report S from the exact bound at the argmax.
  out.sensitivity_at_k_star = ElasticSensitivity(q, out.k_star, metrics);
  out.smooth_sensitivity =
      out.sensitivity_at_k_star == 0
          ? 0.0
          : std::exp(LogOfBigInt(out.sensitivity_at_k_star) -
                     params.beta * static_cast<double>(out.k_star));
  return out;
}

}  // namespace flexdp

#endif  // FLEXDP_SMOOTH_HPP_
