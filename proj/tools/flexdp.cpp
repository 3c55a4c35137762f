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

// flexdp: elastic sensitivity analysis and differentially private release
// of SQL counting queries.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "flexdp/cli.hpp"

namespace {

void AddCommonOptions(CLI::App* cmd, flexdp::RunConfig& config) {
  cmd->add_option("--metrics", config.metrics_path, "Metrics file");
  cmd->add_option("--data", config.data_dir, "Directory of CSV tables");
  cmd->add_flag("--json", config.json, "Machine-readable output");
}

void AddPrivacyOptions(CLI::App* cmd, flexdp::RunConfig& config) {
  cmd->add_option("--epsilon", config.epsilon, "Privacy parameter epsilon");
  cmd->add_option("--delta", config.delta,
                  "Privacy parameter delta (default n^(-epsilon ln n) for database size n)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic sensitivity analysis and private release of SQL counting queries"};
  app.require_subcommand(1);
  flexdp::RunConfig config;
  std::string query_path;
  std::string corpus = "corpus";

  auto* analyze = app.add_subcommand("analyze", "Report the smoothed elastic sensitivity of a query");
  AddCommonOptions(analyze, config);
  AddPrivacyOptions(analyze, config);
  analyze->add_option("query", query_path, "File holding the SQL query")->required();

  auto* collect = app.add_subcommand("collect-metrics", "Compute max-frequency metrics");
  AddCommonOptions(collect, config);
  collect->add_flag("--emit-sql", config.emit_sql, "Print collection SQL instead of computing");
  collect->add_option("--public", config.public_tables, "Tables whose contents are public")
      ->delimiter(',');

  auto* release = app.add_subcommand("release", "Answer a query with calibrated Laplace noise");
  AddCommonOptions(release, config);
  AddPrivacyOptions(release, config);
  release->add_option("query", query_path, "File holding the SQL query")->required();
  release->add_option("--seed", config.seed, "Seed for the noise generator");
  release->add_option("--bins", config.bins, "Comma-separated histogram bin labels");
  release->add_option("--true-result", config.true_result,
                      "True answer (count, or label=count list), or a file holding it");
  release->add_flag("--execute", config.execute, "Evaluate the query over the --data tables");
  release->add_option("--budget-epsilon", config.budget_epsilon, "Maximum total epsilon");
  release->add_option("--budget-delta", config.budget_delta, "Maximum total delta");
  release->add_option("--ledger", config.ledger_path,
                      "Budget ledger file (default: <metrics>.budget.json)");

  auto* check = app.add_subcommand("check", "Compare the bounds against brute-force enumeration");
  AddCommonOptions(check, config);
  check->add_option("corpus", corpus, "Corpus directory")->capture_default_str();
  check->add_option("--max-k", config.max_k, "Largest distance to check")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return flexdp::RunAnalyze(query_path, config, std::cout);
    if (collect->parsed()) return flexdp::RunCollectMetrics(config, std::cout);
    if (release->parsed()) return flexdp::RunRelease(query_path, config, std::cout);
    return flexdp::RunCheck(corpus, config, std::cout);
  } catch (const flexdp::Error& e) {
    std::cerr << "error [" << flexdp::CategoryName(e.category()) << "]: " << e.what() << "\n";
    return flexdp::ExitCodeFor(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error [io]: " << e.what() << "\n";
    return 3;
  }
}
