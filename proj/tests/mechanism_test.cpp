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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <cstring>
#include <random>

#include "flexdp/budget.hpp"
#include "flexdp/laplace.hpp"
#include "flexdp/release.hpp"
#include "flexdp/smooth.hpp"
#include "flexdp/sql_parser.hpp"
#include "test_support.hpp"

namespace flexdp {
namespace {

using Decimal = boost::multiprecision::cpp_dec_float_50;

double BetaReference(double epsilon, double delta) {
  const Decimal eps(epsilon);
  const Decimal d(delta);
  return static_cast<double>(eps / (2 * log(Decimal(2) / d)));
}

TEST(PrivacyParamsTest, BetaFromClosedForm) {
  const PrivacyParams p = PrivacyParams::Make(0.7, 1e-8);
  EXPECT_NEAR(p.beta, BetaReference(0.7, 1e-8), 1e-16);
  EXPECT_NEAR(p.beta, 0.0183115, 2e-7);  // the commonly quoted rounding
}

TEST(PrivacyParamsTest, QuarterBeta) {
  const PrivacyParams p = PrivacyParams::Make(1.0, 2 / std::exp(2.0));
  EXPECT_NEAR(p.beta, 0.25, 1e-15);
}

TEST(PrivacyParamsTest, DefaultDeltaFromDatabaseSize) {
  const PrivacyParams p = PrivacyParams::Make(0.1, std::nullopt, 1'000'000);
  const Decimal ln_n = log(Decimal(1'000'000));
  const double expected = static_cast<double>(exp(-Decimal("0.1") * ln_n * ln_n));
  EXPECT_NEAR(p.delta / expected, 1.0, 1e-12);
  EXPECT_NEAR(p.beta, BetaReference(0.1, p.delta), 1e-15);
}

TEST(PrivacyParamsTest, RejectsInvalidInput) {
  for (double eps : {0.0, -1.0, std::nan(""), HUGE_VAL}) {
    EXPECT_THROW(PrivacyParams::Make(eps, 1e-6), Error);
  }
  for (double delta : {0.0, 1.0, -0.5, 2.0}) {
    EXPECT_THROW(PrivacyParams::Make(1.0, delta), Error);
  }
  EXPECT_THROW(PrivacyParams::Make(1.0, std::nullopt), Error);
  EXPECT_THROW(PrivacyParams::Make(1.0, std::nullopt, 1), Error);
  try {
    PrivacyParams::Make(-1, 1e-6);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidParams);
  }
}

TEST(SmoothBoundTest, SearchBound) {
  EXPECT_EQ(SearchBound(0, 0.01), 1u);
  EXPECT_EQ(SearchBound(2, 0.25), 16u);
  EXPECT_EQ(SearchBound(3, 0.1), 90u);
  EXPECT_EQ(SearchBound(3, 0.11), 82u);
}

TEST(SmoothBoundTest, NoJoinCountHasUnitSensitivity) {
  MetricsStore m;
  m.row_counts["trips"] = 100;
  m.mf[{"trips", "city"}] = 30;
  auto q = ParseQuery("SELECT COUNT(*) FROM trips", m.ToCatalog());
  const SmoothBound b = ComputeSmoothBound(*q, m, PrivacyParams::Make(1.0, 1e-6));
  EXPECT_DOUBLE_EQ(b.smooth_sensitivity, 1.0);
  EXPECT_EQ(b.k_star, 0u);
  EXPECT_EQ(b.values_scanned, b.k_max + 1);
}

// Reference maximization of e^(-beta k) p(k) in extended precision over a
// much wider range than the search bound.
std::pair<long double, std::uint64_t> WideScan(const std::function<BigInt(std::uint64_t)>& f,
                                               double beta, std::uint64_t limit) {
  long double best = -1;
  std::uint64_t arg = 0;
  for (std::uint64_t k = 0; k <= limit; ++k) {
    const long double v = std::exp(-static_cast<long double>(beta) * k) * f(k).convert_to<long double>();
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  return {best, arg};
}

TEST(SmoothBoundTest, PolynomialScanMatchesWideScan) {
  const Polynomial p(std::vector<BigInt>{8711, 199, 2});
  for (double delta : {1e-7, 1e-8}) {
    const double beta = PrivacyParams::Make(0.7, delta).beta;
    const std::uint64_t k_max = SearchBound(2, beta);
    const SmoothBound b = ScanSmoothBound(
        [&](std::uint64_t k) { return LogOfBigInt(p.Evaluate(k)); }, beta, k_max);
    const auto [best, arg] = WideScan([&](std::uint64_t k) { return p.Evaluate(k); }, beta, 50 * k_max);
    EXPECT_NEAR(b.smooth_sensitivity / static_cast<double>(best), 1.0, 1e-9);
    EXPECT_EQ(b.k_star, arg);
    EXPECT_LE(b.k_star, k_max);
  }
}

TEST(SmoothBoundTest, ZeroSensitivityGivesZeroBound) {
  MetricsStore m;
  m.row_counts["cities"] = 10;
  m.mf[{"cities", "id"}] = 1;
  m.public_tables.insert("cities");
  auto q = ParseQuery("SELECT COUNT(*) FROM cities", m.ToCatalog());
  const SmoothBound b = ComputeSmoothBound(*q, m, PrivacyParams::Make(1.0, 1e-6));
  EXPECT_EQ(b.smooth_sensitivity, 0.0);
  EXPECT_EQ(b.k_star, 0u);
}

TEST(SmoothBoundTest, InvariantsOnRandomQueries) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Catalog c = testing::RandomCatalog(rng, 3, 2);
    const MetricsStore m = testing::RandomMetrics(rng, c, 100);
    auto q = testing::RandomQuery(rng, c, 3, 4);
    const PrivacyParams p = PrivacyParams::Make(std::uniform_real_distribution<double>(0.05, 2)(rng), 1e-6);
    const SmoothBound b = ComputeSmoothBound(*q, m, p);
    EXPECT_LE(b.k_star, b.k_max);
    EXPECT_GE(b.k_max, SearchBound(JoinCount(*q), p.beta));
    EXPECT_GE(b.smooth_sensitivity * (1 + 1e-12), ElasticSensitivity(*q, 0, m).convert_to<double>());
    for (std::uint64_t k = 0; k <= b.k_max; k += 1 + b.k_max / 200) {
      const double v = std::exp(LogOfBigInt(ElasticSensitivity(*q, k, m)) - p.beta * static_cast<double>(k));
      EXPECT_GE(b.smooth_sensitivity * (1 + 1e-12), v);
    }
    const double at_star =
        std::exp(LogOfBigInt(b.sensitivity_at_k_star) - p.beta * static_cast<double>(b.k_star));
    EXPECT_NEAR(b.smooth_sensitivity / at_star, 1.0, 1e-12);
  }
}

struct FixedUniform {
  double u;
  double NextUniform() { return u; }
};

TEST(LaplaceTest, InverseCdfSpotValues) {
  EXPECT_EQ(LaplaceFromUniform(0.5, 1.0), 0.0);
  EXPECT_NEAR(LaplaceFromUniform(0.75, 3.0), 3.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(LaplaceFromUniform(0.25, 3.0), -3.0 * std::log(2.0), 1e-15);
  FixedUniform median{0.5};
  EXPECT_EQ(SampleLaplace(1.0, median), 0.0);
}

TEST(LaplaceTest, RejectsBadScale) {
  Rng rng(1);
  for (double scale : {0.0, -1.0, std::nan(""), HUGE_VAL}) {
    try {
      SampleLaplace(scale, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidScale);
    }
  }
}

TEST(LaplaceTest, MomentsAtScaleTwo) {
  Rng rng(20240601);
  const int n = 100000;
  double sum = 0;
  double sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleLaplace(2.0, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = (sum_sq - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var / 8.0, 1.0, 0.05);
}

TEST(LaplaceTest, ReplayIsBitIdentical) {
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = SampleLaplace(2.0, a);
    const double y = SampleLaplace(2.0, b);
    EXPECT_EQ(std::memcmp(&x, &y, sizeof x), 0);
  }
}

TEST(LaplaceTest, UniformStaysInsideOpenInterval) {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.NextUniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(LaplaceTest, SplitStreamsAreDeterministicAndDistinct) {
  const Rng root(42);
  Rng s1 = root.Split(1);
  Rng s1_again = root.Split(1);
  Rng s2 = root.Split(2);
  EXPECT_EQ(s1.seed(), s1_again.seed());
  EXPECT_NE(s1.seed(), s2.seed());
  EXPECT_EQ(s1.NextUniform(), s1_again.NextUniform());
}

MetricsStore TripsMetrics() {
  MetricsStore m;
  m.row_counts = {{"trips", 100}, {"cities", 3}};
  m.mf[{"trips", "city"}] = 40;
  m.mf[{"trips", "driver"}] = 12;
  m.mf[{"cities", "name"}] = 1;
  m.public_tables.insert("cities");
  return m;
}

TEST(ReleaseTest, CountAddsReplayableNoise) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT COUNT(*) FROM trips", m.ToCatalog());
  const PrivacyParams p = PrivacyParams::Make(1.0, 1e-6);
  Rng rng(12345);
  const ReleaseResult r = ReleaseCount(100, *q, m, p, rng);
  EXPECT_EQ(r.metadata.noise_scale, 2.0);
  EXPECT_EQ(r.metadata.seed, 12345u);
  EXPECT_EQ(r.metadata.k_star, 0u);
  Rng replay(12345);
  EXPECT_EQ(std::get<NoisyCount>(r.output).value, 100 + SampleLaplace(2.0, replay));
}

TEST(ReleaseTest, NoiseScaleIsTwoSOverEpsilon) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT COUNT(*) FROM trips a JOIN trips b ON a.driver = b.driver", m.ToCatalog());
  const PrivacyParams p = PrivacyParams::Make(0.3, 1e-7);
  Rng rng(1);
  const ReleaseResult r = ReleaseCount(10, *q, m, p, rng);
  EXPECT_EQ(r.metadata.noise_scale, 2 * r.metadata.smooth_sensitivity / 0.3);
  EXPECT_GT(r.metadata.smooth_sensitivity, 1.0);
}

TEST(ReleaseTest, ScalarPathRejectsGroupedQuery) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT city, COUNT(*) FROM trips GROUP BY city", m.ToCatalog());
  Rng rng(1);
  EXPECT_THROW(ReleaseCount(3, *q, m, PrivacyParams::Make(1, 1e-6), rng), Error);
}

TEST(ReleaseTest, ZeroSensitivityIsNeverReleasedWithoutNoise) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT COUNT(*) FROM cities", m.ToCatalog());
  Rng rng(1);
  try {
    ReleaseCount(3, *q, m, PrivacyParams::Make(1, 1e-6), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidScale);
  }
}

TEST(ReleaseTest, HistogramEnumeratesEveryBin) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT city, COUNT(*) FROM trips GROUP BY city", m.ToCatalog());
  const PrivacyParams p = PrivacyParams::Make(1.0, 1e-6);
  Rng rng(77);
  const ReleaseResult r = ReleaseHistogram({{"A", 5}}, {"A", "B", "C"}, *q, m, p, rng);
  const auto& bins = std::get<NoisyHistogram>(r.output).bins;
  ASSERT_EQ(bins.size(), 3u);
  EXPECT_EQ(r.metadata.noise_scale, 4.0);
  Rng replay(77);
  EXPECT_EQ(bins[0].label, "A");
  EXPECT_EQ(bins[0].value, 5 + SampleLaplace(4.0, replay));
  EXPECT_EQ(bins[1].label, "B");
  EXPECT_EQ(bins[1].value, 0 + SampleLaplace(4.0, replay));
  EXPECT_EQ(bins[2].label, "C");
  EXPECT_EQ(bins[2].value, 0 + SampleLaplace(4.0, replay));
}

TEST(ReleaseTest, HistogramDomainChecks) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT city, COUNT(*) FROM trips GROUP BY city", m.ToCatalog());
  const PrivacyParams p = PrivacyParams::Make(1.0, 1e-6);
  Rng rng(1);
  EXPECT_TRUE(std::get<NoisyHistogram>(ReleaseHistogram({}, {}, *q, m, p, rng).output).bins.empty());
  try {
    ReleaseHistogram({{"Z", 1}}, {"A"}, *q, m, p, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownBinLabel);
  }
  EXPECT_THROW(ReleaseHistogram({}, {"A", "A"}, *q, m, p, rng), Error);
}

TEST(ReleaseTest, BinDomainOfPrivateColumnIsProtected) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT city, COUNT(*) FROM trips GROUP BY city", m.ToCatalog());
  try {
    ResolveBinDomain(*q, m, nullptr, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtectedBinLabels);
  }
  const std::vector<std::string> supplied{"x", "y"};
  EXPECT_EQ(ResolveBinDomain(*q, m, &supplied, nullptr), supplied);
}

TEST(ReleaseTest, BinDomainOfPublicColumnIsEnumerated) {
  const MetricsStore m = TripsMetrics();
  auto q = ParseQuery("SELECT c.name, COUNT(*) FROM trips t JOIN cities c ON t.city = c.name GROUP BY c.name",
                      m.ToCatalog());
  std::map<std::string, TableData> data;
  data["cities"] = ParseCsv("name\nOslo\nLima\nOslo\nRome\n");
  EXPECT_EQ(ResolveBinDomain(*q, m, nullptr, &data), (std::vector<std::string>{"Lima", "Oslo", "Rome"}));
  EXPECT_THROW(ResolveBinDomain(*q, m, nullptr, nullptr), Error);
}

TEST(BudgetTest, EpsilonAccumulatesUntilMaximum) {
  BudgetLedger ledger(1.0, 1e-5);
  ledger.Charge(0.5, 1e-6);
  ledger.Charge(0.5, 1e-6);
  EXPECT_FALSE(ledger.CanAfford(0.5, 1e-6));
  try {
    ledger.Charge(0.5, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExhausted);
  }
}

TEST(BudgetTest, DeltaAccumulatesLikeEpsilon) {
  BudgetLedger ledger(10.0, 3e-6);
  ledger.Charge(0.1, 1e-6);
  ledger.Charge(0.1, 1e-6);
  ledger.Charge(0.1, 1e-6);
  EXPECT_THROW(ledger.Charge(0.1, 1e-6), Error);
}

TEST(BudgetTest, RefusalLeavesTotalsBitIdentical) {
  BudgetLedger ledger(1.0, 1e-5);
  ledger.Charge(0.7, 3e-6);
  const double eps = ledger.spent_epsilon();
  const double delta = ledger.spent_delta();
  EXPECT_THROW(ledger.Charge(0.4, 1e-6), Error);
  EXPECT_EQ(ledger.spent_epsilon(), eps);
  EXPECT_EQ(ledger.spent_delta(), delta);
}

TEST(BudgetTest, DecimalSumsReachTheMaximum) {
  BudgetLedger ledger(1.0, 1e-5);
  ledger.Charge(0.1, 0);
  ledger.Charge(0.2, 0);
  ledger.Charge(0.7, 0);
  EXPECT_THROW(ledger.Charge(1e-9, 0), Error);
}

TEST(BudgetTest, RejectsInvalidMaxima) {
  EXPECT_THROW(BudgetLedger(0, 1e-6), Error);
  EXPECT_THROW(BudgetLedger(1, 0), Error);
  EXPECT_THROW(BudgetLedger(1, 1), Error);
  EXPECT_THROW(BudgetLedger(1, 1e-6, -1, 0), Error);
}

}  // namespace
}  // namespace flexdp
