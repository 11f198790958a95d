/*
 * Copyright 2026 The fairaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fairaudit/error.h"
#include "fairaudit/harness.h"
#include "fairaudit/synth.h"

namespace fa = fairaudit;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kCellFailures = 3 };

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  std::string format = "both";
  bool fixed_clock = false;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* config = cmd->add_option("--config", flags.config, "configuration file (JSON)");
  if (config_required) config->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--seed", flags.seed, "override the configured seed");
  cmd->add_option("--format", flags.format, "report format")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  cmd->add_flag("--fixed-clock", flags.fixed_clock, "zero timestamps for reproducible output");
}

fa::OutputFormat ParseFormat(const std::string& s) {
  if (s == "json") return fa::OutputFormat::kJson;
  if (s == "csv") return fa::OutputFormat::kCsv;
  return fa::OutputFormat::kBoth;
}

void PrintSummary(const fa::ExperimentReport& report) {
  for (const fa::CellReport& c : report.cells) {
    if (!c.ok) {
      std::printf("%-12s %-5s FAILED %s\n", c.attribute.c_str(), c.method.c_str(), c.error.c_str());
      continue;
    }
    std::printf("%-12s %-5s EOD=%+.4f gamma=%.4f BAcc=%.4f+-%.4f AUC=%.4f %s\n",
                c.attribute.c_str(), c.method.c_str(), c.fairness.eod, c.fairness.gamma,
                c.report.bacc_mean, c.report.bacc_half_width, c.report.auc_mean,
                c.fairness.fair ? "fair" : "unfair");
  }
  for (const fa::AttributeSummary& a : report.attributes) {
    if (!a.best_method.empty()) {
      std::printf("%-12s best mitigation: %s\n", a.attribute.c_str(), a.best_method.c_str());
    }
  }
}

int RunExperimentCommand(const CommonFlags& flags, bool with_mitigations) {
  fa::ExperimentConfig config = fa::LoadExperimentConfig(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    if (config.data.synthetic) config.data.synthetic->seed = *flags.seed;
  }
  if (!with_mitigations) config.mitigations.clear();
  config.fixed_clock = flags.fixed_clock;
  const std::filesystem::path out = flags.out.empty() ? config.output_dir : std::filesystem::path(flags.out);
  const fa::ExperimentReport report = fa::RunExperiment(config);
  for (const auto& path : fa::WriteReport(report, out, ParseFormat(flags.format))) {
    std::printf("wrote %s\n", path.string().c_str());
  }
  try {
    for (const auto& path : fa::RenderFigures(report, out)) {
      std::printf("wrote %s\n", path.string().c_str());
    }
  } catch (const fa::Error& e) {
    if (e.code() != fa::ErrorCode::kIncompleteReport) throw;
    std::fprintf(stderr, "figures skipped: %s\n", e.what());
  }
  PrintSummary(report);
  return report.FailedCells() > 0 ? kCellFailures : kOk;
}

int RunSynth(const CommonFlags& flags) {
  std::ifstream in(flags.config);
  if (!in) throw fa::Error(fa::ErrorCode::kIo, "cannot open '" + flags.config + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fa::Error(fa::ErrorCode::kSpecInvalid, e.what());
  }
  fa::CohortSpec spec = fa::CohortSpecFromJson(doc);
  if (flags.seed) spec.seed = *flags.seed;
  const fa::Cohort cohort = fa::GenerateCohort(spec);
  const std::filesystem::path out = flags.out.empty() ? "." : flags.out;
  std::filesystem::create_directories(out);
  fa::WriteCsv(cohort, out / "cohort.csv");
  std::ofstream schema(out / "schema.json", std::ios::binary);
  schema << fa::SchemaToJson(cohort.schema()).dump(2) << "\n";
  if (!schema) throw fa::Error(fa::ErrorCode::kIo, "cannot write schema.json");
  std::printf("wrote %s\nwrote %s\n", (out / "cohort.csv").string().c_str(),
              (out / "schema.json").string().c_str());
  return kOk;
}

int RunReport(const CommonFlags& flags, const std::string& input) {
  std::ifstream in(input);
  if (!in) throw fa::Error(fa::ErrorCode::kIo, "cannot open '" + input + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw fa::Error(fa::ErrorCode::kBadValue, std::string("report: ") + e.what());
  }
  const fa::ExperimentReport report = fa::ReportFromJson(doc);
  const std::filesystem::path out =
      flags.out.empty() ? std::filesystem::path(input).parent_path() : std::filesystem::path(flags.out);
  if (flags.format != "json") {
    for (const auto& path : fa::WriteReport(report, out, fa::OutputFormat::kCsv)) {
      std::printf("wrote %s\n", path.string().c_str());
    }
  }
  for (const auto& path : fa::RenderFigures(report, out)) {
    std::printf("wrote %s\n", path.string().c_str());
  }
  return report.FailedCells() > 0 ? kCellFailures : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness auditing and bias mitigation for binary classifiers"};
  app.set_version_flag("--version", std::string(fa::kToolkitVersion));
  app.require_subcommand(1);

  CommonFlags audit_flags, mitigate_flags, synth_flags, report_flags;
  std::string report_input;
  auto* audit = app.add_subcommand("audit", "base model and fairness report");
  AddCommon(audit, audit_flags, true);
  auto* mitigate = app.add_subcommand("mitigate", "base model plus every configured mitigation");
  AddCommon(mitigate, mitigate_flags, true);
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort from a spec file");
  AddCommon(synth, synth_flags, true);
  auto* report = app.add_subcommand("report", "re-render figures from a saved report.json");
  AddCommon(report, report_flags, false);
  report->add_option("--input", report_input, "report.json to render")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*audit) return RunExperimentCommand(audit_flags, false);
    if (*mitigate) return RunExperimentCommand(mitigate_flags, true);
    if (*synth) return RunSynth(synth_flags);
    if (*report) return RunReport(report_flags, report_input);
  } catch (const fa::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(fa::ErrorCodeName(e.code())).c_str(),
                 e.what());
    return e.IsDataError() ? kData : kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
