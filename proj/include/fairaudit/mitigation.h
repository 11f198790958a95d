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

#ifndef FAIRAUDIT_MITIGATION_H_
#define FAIRAUDIT_MITIGATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/cohort.h"
#include "json.hpp"

namespace fairaudit {

enum class MitigationMethod { kSup, kRw, kDir, kCpp, kPsta };

std::string_view MethodName(MitigationMethod method);
MitigationMethod ParseMethod(std::string_view name);
bool IsPostProcessing(MitigationMethod method);

struct MitigationSpec {
  MitigationMethod method = MitigationMethod::kPsta;
  std::string protected_attribute;
  // DIR
  double repair_level = 1.0;
  // PSTA
  double grid_step = 0.01;
  double default_threshold = 0.5;
  std::vector<std::string> unprivileged;  // empty: auto-detect
  // CPP
  uint64_t seed = 0;

  void Validate() const;
};

// --- Suppression --------------------------------------------------------

struct Suppression {
  Cohort training;                  // cohort without the suppressed column
  std::vector<int> evaluation_groups;  // labels kept for evaluation (protected only)
  std::optional<std::string> warning;
};

// Drops `name` from the learner's view. Suppressing a non-protected column is
// allowed and reported through `warning`.
Suppression Suppress(const Cohort& cohort, std::string_view name);

// --- Reweighing ---------------------------------------------------------

// w(x, c) = P(x) P(c) / P(x, c) from empirical frequencies. Throws kEmptyCell.
std::vector<double> Reweigh(std::span<const int> groups, std::span<const uint8_t> y);
std::vector<double> Reweigh(const Cohort& cohort, std::string_view protected_name);

// --- Disparate impact remover -------------------------------------------

// Quantile repair of numeric features toward the per-quantile median of the
// group distributions. Fit on training rows only; `Apply` maps unseen rows
// through the fitted group CDFs.
class DisparateImpactRepairer {
 public:
  static DisparateImpactRepairer Fit(const Cohort& cohort, std::string_view protected_name,
                                     double repair_level);

  // Repairs the rows the repairer was fit on (exact in-group ranks).
  Cohort RepairFitted(const Cohort& cohort) const;
  // Repairs arbitrary rows with the same schema.
  Cohort Apply(const Cohort& cohort) const;

  double repair_level() const { return repair_level_; }
  nlohmann::json ToJson() const;

 private:
  struct ColumnModel {
    size_t column = 0;
    // Sorted non-missing training values per group level (empty if absent).
    std::vector<std::vector<double>> order_stats;
  };

  double MedianQuantile(const ColumnModel& model, double u) const;
  Cohort Finish(const Cohort& cohort, std::vector<std::vector<double>> repaired) const;

  std::string protected_name_;
  double repair_level_ = 1.0;
  std::vector<ColumnModel> columns_;
};

Cohort DirRepair(const Cohort& cohort, std::string_view protected_name, double repair_level);

// --- Calibrated equalized odds (FNR cost) -------------------------------

struct CppGroup {
  double mix_rate = 0.0;
  double base_rate = 0.0;
  double generalized_fnr = 0.0;
  // Expected generalized FNR after mixing.
  double equalized_fnr = 0.0;
  // False when even full mixing leaves the group short of the target.
  bool reachable = true;
};

struct CppPolicy {
  std::map<int, CppGroup> groups;
  uint64_t seed = 0;
};

CppPolicy CppFit(std::span<const double> p, std::span<const uint8_t> y,
                 std::span<const int> groups, uint64_t seed);

// Replaces p_i by its group's base rate with probability mix_rate, drawn from
// a counter-based stream keyed by (seed, i). Rows of unknown groups pass
// through and are counted in `unknown_rows`.
std::vector<double> CppApply(const CppPolicy& policy, std::span<const double> p,
                             std::span<const int> groups, size_t* unknown_rows = nullptr);

// --- Population sensitivity-guided threshold adjustment -----------------

struct PstaOptions {
  double grid_step = 0.01;
  double default_threshold = 0.5;
  std::optional<std::vector<int>> unprivileged;  // nullopt: auto
  // Ensures entries for levels 0..num_levels-1 even when absent from the fit.
  int num_levels = 0;
};

struct ThresholdPolicy {
  std::map<int, double> thresholds;
  double default_threshold = 0.5;
  std::vector<int> unprivileged;
  double overall_sensitivity = 0.0;
};

// Threshold sweep points {0, step, 2 step, ..., 1}.
std::vector<double> ThresholdGrid(double step);

ThresholdPolicy PstaFit(std::span<const double> p, std::span<const uint8_t> y,
                        std::span<const int> groups, const PstaOptions& options);

struct ThresholdApplication {
  std::vector<uint8_t> predictions;
  size_t unknown_group_rows = 0;
};

ThresholdApplication ApplyThresholds(std::span<const double> p, std::span<const int> groups,
                                     const ThresholdPolicy& policy);

nlohmann::json ThresholdPolicyToJson(const ThresholdPolicy& policy,
                                     std::span<const std::string> levels);
nlohmann::json CppPolicyToJson(const CppPolicy& policy, std::span<const std::string> levels);

}  // namespace fairaudit

#endif  // FAIRAUDIT_MITIGATION_H_
