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
#ifndef FLEXDP_RELEASE_HPP_
#define FLEXDP_RELEASE_HPP_

// Noisy release of counts and histograms at Laplace scale 2S / epsilon.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "flexdp/error.hpp"
#include "flexdp/laplace.hpp"
#include "flexdp/metrics.hpp"
#include "flexdp/relalg.hpp"
#include "flexdp/smooth.hpp"
#include "flexdp/table.hpp"
#include "flexdp/value.hpp"

namespace flexdp {

struct NoisyCount {
  double value = 0;
};

struct HistogramBin {
  std::string label;
  double value = 0;
};

struct NoisyHistogram {
  std::vector<HistogramBin> bins;
};

struct ReleaseMetadata {
  double smooth_sensitivity = 0;
  std::uint64_t k_star = 0;
  std::uint64_t k_max = 0;
  double noise_scale = 0;
  double epsilon = 0;
  double delta = 0;
  double beta = 0;
  std::uint64_t seed = 0;
  std::string rng = std::string(Rng::kName);
};

struct ReleaseResult {
  std::variant<NoisyCount, NoisyHistogram> output;
  ReleaseMetadata metadata;
};

// Bin label for a group key: values joined with '|'.
inline std::string BinLabel(const std::vector<Value>& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) out += '|';
    out += ToString(key[i]);
  }
  return out;
}

namespace internal {

inline ReleaseMetadata Calibrate(const RelExpr& q, const MetricsStore& metrics,
                                 const PrivacyParams& params, const Rng& rng) {
  const SmoothBound bound = ComputeSmoothBound(q, metrics, params);
  ReleaseMetadata meta;
  meta.smooth_sensitivity = bound.smooth_sensitivity;
  meta.k_star = bound.k_star;
  meta.k_max = bound.k_max;
  meta.noise_scale = 2 * bound.smooth_sensitivity / params.epsilon;
  meta.epsilon = params.epsilon;
  meta.delta = params.delta;
  meta.beta = params.beta;
  meta.seed = rng.seed();
  if (!(meta.noise_scale > 0)) {
    throw Error(ErrorCode::kInvalidScale,
                "smooth sensitivity is zero; refusing to release without noise");
  }
  return meta;
}

}  // namespace internal

inline ReleaseResult ReleaseCount(double true_count, const RelExpr& q,
                                  const MetricsStore& metrics, const PrivacyParams& params,
                                  Rng& rng) {
  if (!q.As<CountNode>()) {
    throw Error(ErrorCode::kInvalidParams,
                "scalar release needs a Count query; use a histogram release for grouped counts");
  }
  ReleaseResult out;
  out.metadata = internal::Calibrate(q, metrics, params, rng);
  out.output = NoisyCount{true_count + SampleLaplace(out.metadata.noise_scale, rng)};
  return out;
}

// One noisy value per label of `bin_domain`, in domain order. Labels absent
// from `true_bins` are released as noise around zero.
inline ReleaseResult ReleaseHistogram(const std::map<std::string, double>& true_bins,
                                      const std::vector<std::string>& bin_domain,
                                      const RelExpr& q, const MetricsStore& metrics,
                                      const PrivacyParams& params, Rng& rng) {
  if (!q.As<CountGroupedNode>()) {
    throw Error(ErrorCode::kInvalidParams, "histogram release needs a grouped Count query");
  }
  std::set<std::string> domain;
  for (const auto& label : bin_domain) {
    if (!domain.insert(label).second) {
      throw Error(ErrorCode::kInvalidParams, "bin label '" + label + "' appears twice");
    }
  }
  for (const auto& [label, count] : true_bins) {
    if (!domain.count(label)) {
      throw Error(ErrorCode::kUnknownBinLabel,
                  "query produced a group '" + label + "' outside the supplied bin domain");
    }
  }
  ReleaseResult out;
  out.metadata = internal::Calibrate(q, metrics, params, rng);
  NoisyHistogram hist;
  for (const auto& label : bin_domain) {
    auto it = true_bins.find(label);
    const double base = it == true_bins.end() ? 0.0 : it->second;
    hist.bins.push_back({label, base + SampleLaplace(out.metadata.noise_scale, rng)});
  }
  out.output = std::move(hist);
  return out;
}

// Bin domain for a grouped query. An explicit list wins; otherwise every
// grouping column must come from a public table whose contents are at hand,
// and the domain is the product of the distinct values found there.
inline std::vector<std::string> ResolveBinDomain(
    const RelExpr& q, const MetricsStore& metrics, const std::vector<std::string>* supplied,
    const std::map<std::string, TableData>* data) {
  if (supplied) return *supplied;
  const auto* grouped = q.As<CountGroupedNode>();
  if (!grouped) throw Error(ErrorCode::kInvalidParams, "query is not a grouped count");
  std::vector<std::vector<Value>> per_column;
  for (const auto& attr : grouped->group_attrs) {
    const Provenance p = ResolveAttribute(attr, *grouped->input);
    const auto* base = std::get_if<BaseColumn>(&p);
    if (!base || !metrics.IsPublic(base->table)) {
      throw Error(ErrorCode::kProtectedBinLabels,
                  "grouping column '" + attr.name +
                      "' is not drawn from a public table; supply the bin labels with --bins");
    }
    const TableData* table = nullptr;
    if (data) {
      if (auto it = data->find(base->table); it != data->end()) table = &it->second;
    }
    if (!table) {
      throw Error(ErrorCode::kProtectedBinLabels,
                  "no data for public table '" + base->table +
                      "' to enumerate bin labels; supply them with --bins");
    }
    const auto idx = table->ColumnIndex(base->column);
    if (!idx) {
      throw Error(ErrorCode::kMissingColumn,
                  "table '" + base->table + "' has no column '" + base->column + "'");
    }
    std::set<Value> distinct;
    for (const auto& row : table->rows) distinct.insert(row[*idx]);
    per_column.emplace_back(distinct.begin(), distinct.end());
  }
  std::vector<std::vector<Value>> keys{{}};
  for (const auto& values : per_column) {
    std::vector<std::vector<Value>> next;
    for (const auto& prefix : keys) {
      for (const auto& v : values) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    keys = std::move(next);
  }
  std::vector<std::string> labels;
  for (const auto& key : keys) labels.push_back(BinLabel(key));
  return labels;
}

}  // namespace flexdp

#endif  // FLEXDP_RELEASE_HPP_
