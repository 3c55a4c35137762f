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
#ifndef FLEXDP_LAPLACE_HPP_
#define FLEXDP_LAPLACE_HPP_

// Seeded uniform source and inverse-CDF Laplace sampling.
//
// This is a textbook floating-point sampler. It does not defend against the
// floating-point side channels that snapping or discrete Laplace samplers
// address; production deployments handling adversarial analysts need one of
// those instead.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "flexdp/error.hpp"

namespace flexdp {

// mt19937_64 stream identified by its seed, so every release can be replayed.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1): 53 random bits, centred in their cell.
  double NextUniform() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // An independent stream derived from this generator's seed.
  Rng Split(std::uint64_t stream) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return Rng((static_cast<std::uint64_t>(words[0]) << 32) | words[1]);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Inverse CDF of the zero-centred Laplace distribution at u in (0, 1).
inline double LaplaceFromUniform(double u, double scale) {
  const double centred = u - 0.5;
  if (centred == 0) return 0.0;
  const double sign = centred > 0 ? 1.0 : -1.0;
  return -scale * sign * std::log(1 - 2 * std::fabs(centred));
}

template <class UniformSource>
double SampleLaplace(double scale, UniformSource& source) {
  if (!(scale > 0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidScale, "Laplace scale must be positive and finite");
  }
  return LaplaceFromUniform(source.NextUniform(), scale);
}

}  // namespace flexdp

#endif  // FLEXDP_LAPLACE_HPP_
