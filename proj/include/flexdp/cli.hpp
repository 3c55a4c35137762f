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
#ifndef FLEXDP_CLI_HPP_
#define FLEXDP_CLI_HPP_

// The four flexdp commands. Each writes its report to `out` and throws
// flexdp::Error on failure; the tool's main maps the error category to an
// exit code.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexdp/budget.hpp"
#include "flexdp/error.hpp"
#include "flexdp/laplace.hpp"
#include "flexdp/metrics.hpp"
#include "flexdp/oracle.hpp"
#include "flexdp/release.hpp"
#include "flexdp/sensitivity.hpp"
#include "flexdp/smooth.hpp"
#include "flexdp/sql_parser.hpp"
#include "flexdp/table.hpp"

namespace flexdp {

// Exit code of `check` when a bound is violated.
inline constexpr int kCheckViolationExitCode = 4;

struct RunConfig {
  std::optional<std::filesystem::path> metrics_path;
  std::optional<std::filesystem::path> data_dir;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  std::optional<double> budget_epsilon;
  std::optional<double> budget_delta;
  std::optional<std::string> bins;         // comma-separated labels
  std::optional<std::string> true_result;  // value, or path to a file holding it
  bool execute = false;
  bool json = false;

  // collect-metrics
  bool emit_sql = false;
  std::vector<std::string> public_tables;
  // release
  std::optional<std::filesystem::path> ledger_path;
  // check
  std::uint64_t max_k = 2;
};

using Report = nlohmann::ordered_json;

namespace cli_internal {

inline nlohmann::ordered_json BigIntJson(const BigInt& v) {
  if (v <= BigInt(UINT64_MAX)) return static_cast<std::uint64_t>(v);
  return v.str();
}

inline std::string ScalarText(const nlohmann::ordered_json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

inline const std::filesystem::path& RequireMetricsPath(const RunConfig& config) {
  if (!config.metrics_path) throw Error(ErrorCode::kInvalidParams, "--metrics is required");
  return *config.metrics_path;
}

inline const std::filesystem::path& RequireDataDir(const RunConfig& config) {
  if (!config.data_dir) throw Error(ErrorCode::kInvalidParams, "--data is required");
  return *config.data_dir;
}

inline PrivacyParams MakeParams(const RunConfig& config, const MetricsStore& metrics) {
  if (!config.epsilon) throw Error(ErrorCode::kInvalidParams, "--epsilon is required");
  return PrivacyParams::Make(*config.epsilon, config.delta, metrics.DatabaseSize());
}

inline std::vector<std::string> SplitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = metrics_internal::Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double ParseNumber(const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::kFormat, "expected a number for the true result");
  }
  return v;
}

// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock file '" + path.string() + "'");
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kIo, "cannot lock '" + path.string() + "'");
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

inline void WriteFileAtomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace '" + path.string() + "': " + ec.message());
}

inline std::vector<const JoinNode*> Joins(const RelExpr& r) {
  std::vector<const JoinNode*> out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, JoinNode>) {
          out.push_back(&n);
          for (auto* side : {n.left.get(), n.right.get()}) {
            auto inner = Joins(*side);
            out.insert(out.end(), inner.begin(), inner.end());
          }
        } else if constexpr (!std::is_same_v<T, TableNode>) {
          auto inner = Joins(*n.input);
          out.insert(out.end(), inner.begin(), inner.end());
        }
      },
      r.node());
  return out;
}


// Schema for parsing: the CSV headers under --data when given, otherwise the
// columns named by the metrics file.
inline Catalog QueryCatalog(const RunConfig& config, const MetricsStore& metrics) {
  if (!config.data_dir) return metrics.ToCatalog();
  Catalog catalog;
  for (const auto& [name, t] : LoadCsvDirectory(*config.data_dir)) catalog.AddTable(name, t.columns);
  return catalog;
}

}  // namespace cli_internal

// Text form: one "key: value" line per field; arrays of objects print one
// indented line per element.
inline void WriteReport(const Report& report, bool json, std::ostream& out) {
  if (json) {
    out << report.dump(2) << "\n";
    return;
  }
  for (const auto& [key, value] : report.items()) {
    if (value.is_array()) {
      out << key << ":\n";
      for (const auto& item : value) {
        if (item.is_object()) {
          std::string line;
          for (const auto& [k, v] : item.items()) {
            line += (line.empty() ? "" : "  ") + k + "=" + cli_internal::ScalarText(v);
          }
          out << "  " << line << "\n";
        } else {
          out << "  " << cli_internal::ScalarText(item) << "\n";
        }
      }
    } else {
      out << key << ": " << cli_internal::ScalarText(value) << "\n";
    }
  }
}

// Splits a script into statements at semicolons outside quotes and comments.
inline std::vector<std::string> SplitStatements(const std::string& script) {
  std::vector<std::string> out;
  std::string current;
  bool has_content = false;
  char quote = 0;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const char c = script[i];
    if (quote) {
      current += c;
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '-' && i + 1 < script.size() && script[i + 1] == '-') {
      while (i < script.size() && script[i] != '\n') ++i;
      current += '\n';
      continue;
    }
    if (c == ';') {
      if (has_content) out.push_back(metrics_internal::Trim(current));
      current.clear();
      has_content = false;
      continue;
    }
    if (c == '\'' || c == '"') quote = c;
    if (!std::isspace(static_cast<unsigned char>(c))) has_content = true;
    current += c;
  }
  if (has_content) out.push_back(metrics_internal::Trim(current));
  return out;
}

inline Report AnalyzeQuery(std::string_view sql, const Catalog& catalog,
                           const MetricsStore& metrics, const PrivacyParams& params) {
  const RelPtr q = ParseQuery(sql, catalog);
  const SmoothBound bound = ComputeSmoothBound(*q, metrics, params);
  Report r;
  r["query"] = ToString(*q);
  r["kind"] = q->As<CountGroupedNode>() ? "histogram" : "count";
  r["joins"] = JoinCount(*q);
  r["sensitivity_k0"] = cli_internal::BigIntJson(ElasticSensitivity(*q, 0, metrics));
  r["epsilon"] = params.epsilon;
  r["delta"] = params.delta;
  r["beta"] = params.beta;
  r["k_max"] = bound.k_max;
  r["k_star"] = bound.k_star;
  r["sensitivity_k_star"] = cli_internal::BigIntJson(bound.sensitivity_at_k_star);
  r["smooth_sensitivity"] = bound.smooth_sensitivity;
  r["noise_scale"] = 2 * bound.smooth_sensitivity / params.epsilon;
  return r;
}

inline int RunAnalyze(const std::filesystem::path& query_path, const RunConfig& config,
                      std::ostream& out) {
  const MetricsStore metrics = LoadMetrics(cli_internal::RequireMetricsPath(config));
  const PrivacyParams params = cli_internal::MakeParams(config, metrics);
  const Catalog catalog = cli_internal::QueryCatalog(config, metrics);
  WriteReport(AnalyzeQuery(ReadFile(query_path), catalog, metrics, params), config.json, out);
  return 0;
}

inline int RunCollectMetrics(const RunConfig& config, std::ostream& out) {
  if (config.emit_sql) {
    Catalog catalog;
    if (config.data_dir) {
      for (const auto& [name, t] : LoadCsvDirectory(*config.data_dir)) catalog.AddTable(name, t.columns);
    } else if (config.metrics_path) {
      catalog = LoadMetrics(*config.metrics_path).ToCatalog();
    } else {
      throw Error(ErrorCode::kInvalidParams, "--emit-sql needs --data or --metrics for the catalog");
    }
    Report statements = Report::array();
    for (const auto& [table, columns] : catalog.tables()) {
      for (const auto& c : columns) {
        statements.push_back({{"table", table}, {"column", c},
                              {"sql", MetricsCollectionSql(catalog, table, c)}});
      }
    }
    if (config.json) {
      out << statements.dump(2) << "\n";
    } else {
      for (const auto& s : statements) out << s["sql"].get<std::string>() << "\n";
    }
    return 0;
  }
  const auto tables = LoadCsvDirectory(cli_internal::RequireDataDir(config));
  const std::set<std::string> public_tables(config.public_tables.begin(), config.public_tables.end());
  const MetricsStore store = CollectMetrics(tables, public_tables);
  if (!config.metrics_path) {
    if (config.json) {
      Report r;
      r["tables"] = Report::object();
      for (const auto& [t, n] : store.row_counts) r["tables"][t] = n;
      r["public"] = store.public_tables;
      r["mf"] = Report::object();
      for (const auto& [key, v] : store.mf) r["mf"][key.table + "." + key.column] = v;
      out << r.dump(2) << "\n";
    } else {
      out << FormatMetrics(store);
    }
    return 0;
  }
  SaveMetrics(store, *config.metrics_path);
  Report r;
  r["metrics"] = config.metrics_path->string();
  r["tables"] = store.row_counts.size();
  r["columns"] = store.mf.size();
  WriteReport(r, config.json, out);
  return 0;
}

inline std::filesystem::path LedgerPathFor(const RunConfig& config) {
  if (config.ledger_path) return *config.ledger_path;
  return cli_internal::RequireMetricsPath(config).string() + ".budget.json";
}

inline BudgetLedger LoadLedger(const std::filesystem::path& path, const RunConfig& config) {
  std::optional<double> max_eps = config.budget_epsilon;
  std::optional<double> max_delta = config.budget_delta;
  double spent_eps = 0;
  double spent_delta = 0;
  if (std::filesystem::exists(path)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadFile(path));
      spent_eps = j.at("spent_epsilon").get<double>();
      spent_delta = j.at("spent_delta").get<double>();
      if (!max_eps) max_eps = j.at("max_epsilon").get<double>();
      if (!max_delta) max_delta = j.at("max_delta").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, "corrupt budget ledger '" + path.string() + "': " + e.what());
    }
  }
  if (!max_eps || !max_delta) {
    throw Error(ErrorCode::kInvalidParams,
                "no privacy budget configured; pass --budget-epsilon and --budget-delta");
  }
  return BudgetLedger(*max_eps, *max_delta, spent_eps, spent_delta);
}

inline void SaveLedger(const BudgetLedger& ledger, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["max_epsilon"] = ledger.max_epsilon();
  j["max_delta"] = ledger.max_delta();
  j["spent_epsilon"] = ledger.spent_epsilon();
  j["spent_delta"] = ledger.spent_delta();
  cli_internal::WriteFileAtomically(path, j.dump(2) + "\n");
}

inline int RunRelease(const std::filesystem::path& query_path, const RunConfig& config,
                      std::ostream& out) {
  using namespace cli_internal;
  const MetricsStore metrics = LoadMetrics(RequireMetricsPath(config));
  const PrivacyParams params = MakeParams(config, metrics);
  const RelPtr q = ParseQuery(ReadFile(query_path), QueryCatalog(config, metrics));
  const bool grouped = q->As<CountGroupedNode>() != nullptr;

  if (config.execute == config.true_result.has_value()) {
    throw Error(ErrorCode::kInvalidParams, "pass exactly one of --true-result and --execute");
  }
  std::optional<std::map<std::string, TableData>> data;
  if (config.data_dir) data = LoadCsvDirectory(*config.data_dir);

  double true_count = 0;
  std::map<std::string, double> true_bins;
  if (config.execute) {
    if (!data) throw Error(ErrorCode::kInvalidParams, "--execute needs --data");
    const QueryResult result = EvaluateQuery(*q, *data);
    if (grouped) {
      for (const auto& [key, count] : std::get<Histogram>(result)) {
        true_bins[BinLabel(key)] = static_cast<double>(count);
      }
    } else {
      true_count = static_cast<double>(std::get<std::int64_t>(result));
    }
  } else {
    std::string text = *config.true_result;
    if (std::filesystem::is_regular_file(text)) text = ReadFile(text);
    if (grouped) {
      // label=count pairs separated by commas or newlines.
      std::string normalized = text;
      for (char& c : normalized) {
        if (c == '\n') c = ',';
      }
      for (const auto& item : SplitList(normalized, ',')) {
        const auto eq = item.rfind('=');
        if (eq == std::string::npos) {
          throw Error(ErrorCode::kFormat, "expected label=count in the true histogram");
        }
        true_bins[metrics_internal::Trim(item.substr(0, eq))] =
            ParseNumber(metrics_internal::Trim(item.substr(eq + 1)));
      }
    } else {
      true_count = ParseNumber(metrics_internal::Trim(text));
    }
  }

  std::optional<std::vector<std::string>> supplied;
  if (config.bins) supplied = SplitList(*config.bins, ',');

  const std::uint64_t seed = config.seed ? *config.seed : std::random_device{}();
  Rng rng(seed);
  ReleaseResult result;
  if (grouped) {
    const auto domain =
        ResolveBinDomain(*q, metrics, supplied ? &*supplied : nullptr, data ? &*data : nullptr);
    result = ReleaseHistogram(true_bins, domain, *q, metrics, params, rng);
  } else {
    result = ReleaseCount(true_count, *q, metrics, params, rng);
  }

  // Nothing is printed unless the charge is durably recorded.
  const auto ledger_path = LedgerPathFor(config);
  {
    FileLock lock(ledger_path.string() + ".lock");
    BudgetLedger ledger = LoadLedger(ledger_path, config);
    ledger.Charge(params);
    SaveLedger(ledger, ledger_path);
  }

  Report r;
  if (const auto* c = std::get_if<NoisyCount>(&result.output)) {
    r["noisy_count"] = c->value;
  } else {
    Report bins = Report::array();
    for (const auto& b : std::get<NoisyHistogram>(result.output).bins) {
      bins.push_back({{"label", b.label}, {"value", b.value}});
    }
    r["noisy_bins"] = std::move(bins);
  }
  const auto& m = result.metadata;
  r["smooth_sensitivity"] = m.smooth_sensitivity;
  r["k_star"] = m.k_star;
  r["k_max"] = m.k_max;
  r["noise_scale"] = m.noise_scale;
  r["epsilon"] = m.epsilon;
  r["delta"] = m.delta;
  r["beta"] = m.beta;
  r["rng"] = m.rng;
  r["seed"] = m.seed;
  WriteReport(r, config.json, out);
  return 0;
}

// One corpus entry: CSV tables, optional domains.txt, queries.sql and an
// optional metrics.txt that replaces the metrics computed from the data.
struct CheckTally {
  std::uint64_t cases = 0;
  std::uint64_t sensitivity_checks = 0;
  std::uint64_t frequency_checks = 0;
  std::vector<std::string> violations;
};

inline void CheckEntry(const std::filesystem::path& dir, std::uint64_t max_k, CheckTally& tally) {
  const MicroDatabase db = LoadMicroDatabase(dir);
  MetricsStore metrics = ComputeMetrics(db);
  if (std::filesystem::exists(dir / "metrics.txt")) {
    metrics = LoadMetrics(dir / "metrics.txt");
    if (metrics.public_tables != db.public_tables) {
      throw Error(ErrorCode::kFormat,
                  "public tables in " + (dir / "metrics.txt").string() + " disagree with domains.txt");
    }
  }
  const Catalog catalog = db.ToCatalog();
  const std::string entry = dir.filename().string();
  std::size_t index = 0;
  for (const auto& sql : SplitStatements(ReadFile(dir / "queries.sql"))) {
    ++index;
    ++tally.cases;
    const std::string where = entry + " query " + std::to_string(index);
    const RelPtr q = ParseQuery(sql, catalog);
    const auto profile = LocalSensitivityProfile(*q, db, max_k);
    for (std::uint64_t k = 0; k <= max_k; ++k) {
      ++tally.sensitivity_checks;
      const BigInt bound = ElasticSensitivity(*q, k, metrics);
      if (bound < profile[k]) {
        tally.violations.push_back(where + ": elastic sensitivity " + bound.str() + " < local " +
                                   std::to_string(profile[k]) + " at k=" + std::to_string(k));
      }
    }
    for (const JoinNode* join : cli_internal::Joins(*q)) {
      for (const auto& [side, key] : {std::pair{join->left.get(), &join->key_left},
                                      std::pair{join->right.get(), &join->key_right}}) {
        const auto freq = MaxFrequencyProfile(*side, key->index, db, max_k);
        for (std::uint64_t k = 0; k <= max_k; ++k) {
          ++tally.frequency_checks;
          const MfValue mf = MfAtDistance(*side, key->index, k, metrics);
          if (!mf.IsBottom() && *mf.count < freq[k]) {
            tally.violations.push_back(where + ": mf_k of " + key->name + " is " + mf.count->str() +
                                       " < observed " + std::to_string(freq[k]) +
                                       " at k=" + std::to_string(k));
          }
        }
      }
    }
  }
}

inline int RunCheck(const std::filesystem::path& corpus, const RunConfig& config, std::ostream& out) {
  if (!std::filesystem::is_directory(corpus)) {
    throw Error(ErrorCode::kIo, "corpus directory '" + corpus.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> entries;
  if (std::filesystem::exists(corpus / "queries.sql")) {
    entries.push_back(corpus);
  } else {
    for (const auto& e : std::filesystem::directory_iterator(corpus)) {
      if (e.is_directory() && std::filesystem::exists(e.path() / "queries.sql")) entries.push_back(e.path());
    }
    std::sort(entries.begin(), entries.end());
  }
  CheckTally tally;
  for (const auto& dir : entries) CheckEntry(dir, config.max_k, tally);
  Report r;
  r["entries"] = entries.size();
  r["cases"] = tally.cases;
  r["sensitivity_checks"] = tally.sensitivity_checks;
  r["frequency_checks"] = tally.frequency_checks;
  r["violations"] = tally.violations.size();
  if (!tally.violations.empty()) r["violation_details"] = tally.violations;
  WriteReport(r, config.json, out);
  return tally.violations.empty() ? 0 : kCheckViolationExitCode;
}

}  // namespace flexdp

#endif  // FLEXDP_CLI_HPP_
