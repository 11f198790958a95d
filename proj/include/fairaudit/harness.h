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

#ifndef FAIRAUDIT_HARNESS_H_
#define FAIRAUDIT_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/cohort.h"
#include "fairaudit/metrics.h"
#include "fairaudit/mitigation.h"
#include "fairaudit/models.h"
#include "fairaudit/synth.h"
#include "json.hpp"

namespace fairaudit {

inline constexpr std::string_view kToolkitVersion = "0.1.0";
inline constexpr std::string_view kBaseMethod = "BASE";

struct DataSource {
  std::filesystem::path csv;
  std::filesystem::path schema;
  std::optional<CohortSpec> synthetic;
};

enum class PostFitData { kOutOfFold, kInSample };

struct ExperimentConfig {
  DataSource data;
  ModelKind model_kind = ModelKind::kLogistic;
  std::vector<ModelConfig> grid;  // empty: default grid for the kind
  SelectionMetric selection_metric = SelectionMetric::kBalancedAccuracy;
  int k_outer = 10;
  int k_inner = 3;
  uint64_t seed = 0;
  std::vector<std::string> protected_attributes;
  // Optional privileged level per attribute; otherwise the group with the
  // highest base-model mean TPR.
  std::map<std::string, std::string> privileged;
  // A spec with an empty protected_attribute applies to every audited one.
  std::vector<MitigationSpec> mitigations;
  std::filesystem::path output_dir = "fairaudit-out";
  double alpha = 0.05;
  double fairness_band = 0.1;
  // Best-method rule: allowed BAcc drop versus base.
  double bacc_tolerance = 0.02;
  PostFitData post_fit = PostFitData::kOutOfFold;
  bool fixed_clock = false;

  void Validate() const;
  std::vector<ModelConfig> EffectiveGrid() const;
  // Mitigations that apply to `attribute`, in config order.
  std::vector<MitigationSpec> MitigationsFor(const std::string& attribute) const;
};

// Relative paths inside the document resolve against `base_dir`.
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& doc,
                                          const std::filesystem::path& base_dir = {});
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config);

Cohort LoadCohort(const ExperimentConfig& config);

// --- Per-group results ---------------------------------------------------

struct GroupStats {
  std::string level;
  ConfusionCounts pooled;
  double pooled_tpr = 0.0;  // NaN when undefined
  double pooled_fpr = 0.0;
  std::vector<double> fold_tprs;
  double mean_tpr = 0.0;
  double half_width = 0.0;
  // False when some test fold holds no positives of this group; such groups
  // are left out of the Tukey test and of EOD.
  bool included = true;
};

struct GroupReport {
  std::string attribute;
  std::vector<GroupStats> groups;
  double q_critical = 0.0;
  double ms_within = 0.0;
  // significant[i][j] over `groups` indices; false for excluded groups.
  std::vector<std::vector<bool>> significant;
  std::vector<double> fold_bacc;
  std::vector<double> fold_auc;
  double bacc_mean = 0.0;
  double bacc_half_width = 0.0;
  double auc_mean = 0.0;
  double auc_half_width = 0.0;
  ConfusionCounts pooled;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double pooled_bacc = 0.0;
};

struct FairnessSummary {
  double eod = 0.0;
  double gamma = 0.0;
  std::string privileged;
  std::string unprivileged;
  bool fair = false;
};

struct CellReport {
  std::string attribute;
  std::string method;
  bool ok = true;
  std::string error;
  GroupReport report;
  FairnessSummary fairness;
  std::vector<size_t> selected_config;  // per outer fold (model-fitting methods)
  std::vector<nlohmann::json> fold_policies;
  size_t unknown_group_rows = 0;
  std::vector<std::string> warnings;
  // Out-of-fold scores and decisions per cohort row; not serialized.
  std::vector<double> row_scores;
  std::vector<uint8_t> row_predictions;
};

struct AttributeSummary {
  std::string attribute;
  std::string best_method;  // empty when no mitigation succeeded
};

struct ExperimentReport {
  std::string toolkit_version;
  std::string generated_at;
  double wall_clock_seconds = 0.0;
  nlohmann::json config;
  size_t rows = 0;
  std::vector<int> fold_assignments;
  std::vector<CellReport> cells;  // ordered by attribute, then method name
  std::vector<AttributeSummary> attributes;
  std::string best_method_rule;

  const CellReport* Find(std::string_view attribute, std::string_view method) const;
  size_t FailedCells() const;
};

// --- Fold-level fitting --------------------------------------------------

// Everything fitted from one outer fold's training rows for one cell.
struct MethodFit {
  std::string attribute;
  std::string method;
  std::string error;  // non-empty when fitting failed
  size_t selected_config = 0;
  std::optional<TrainedModel> model;
  MedianImputer imputer;
  std::vector<double> training_weights;
  std::optional<DisparateImpactRepairer> repairer;
  Matrix training_features;  // DIR: repaired, imputed training design
  std::optional<ThresholdPolicy> thresholds;
  std::optional<CppPolicy> cpp;
  std::vector<std::string> warnings;

  // Full-precision serialization of the fitted state.
  nlohmann::json Fitted(std::span<const std::string> levels) const;
};

struct FoldFit {
  int fold = 0;
  std::string base_error;
  size_t base_config = 0;
  std::optional<TrainedModel> base_model;
  MedianImputer imputer;
  // Base scores used by post-processing fits, aligned with the training rows.
  std::vector<double> post_fit_scores;
  std::vector<MethodFit> methods;
};

// Fits base model and every mitigation on the training rows of `fold`.
// Reads no test-fold labels.
FoldFit FitFold(const Cohort& cohort, const NestedPlan& plan, int fold,
                const ExperimentConfig& config);

ExperimentReport RunExperiment(const ExperimentConfig& config);
ExperimentReport RunExperiment(const ExperimentConfig& config, const Cohort& cohort);

// --- Output ----------------------------------------------------------------

enum class OutputFormat { kJson, kCsv, kBoth };

nlohmann::json ReportToJson(const ExperimentReport& report);
ExperimentReport ReportFromJson(const nlohmann::json& doc);
std::string SummaryCsv(const ExperimentReport& report);
std::string GroupsCsv(const ExperimentReport& report);

// Writes report.json and/or summary.csv + groups.csv; returns written paths.
std::vector<std::filesystem::path> WriteReport(const ExperimentReport& report,
                                               const std::filesystem::path& outdir,
                                               OutputFormat format);

// Forest plot per (attribute, mitigation) and EOD-vs-BAcc scatter per
// attribute. Throws kIncompleteReport when an attribute lacks a base cell.
std::vector<std::filesystem::path> RenderFigures(const ExperimentReport& report,
                                                 const std::filesystem::path& outdir);
std::string ForestSvg(const ExperimentReport& report, const CellReport& base,
                      const CellReport& mitigated);
std::string ScatterSvg(const ExperimentReport& report, std::string_view attribute);

}  // namespace fairaudit

#endif  // FAIRAUDIT_HARNESS_H_
