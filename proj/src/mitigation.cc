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

#include "fairaudit/mitigation.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fairaudit/error.h"
#include "fairaudit/rng.h"

namespace fairaudit {
namespace {

void CheckSameLength(size_t a, size_t b, size_t c) {
  if (a != b || a != c) throw Error(ErrorCode::kLengthMismatch, "input vectors differ in length");
}

std::string LevelName(std::span<const std::string> levels, int group) {
  if (group >= 0 && static_cast<size_t>(group) < levels.size()) return levels[static_cast<size_t>(group)];
  return std::to_string(group);
}

// Linear interpolation of a group's quantile function through the points
// ((j + 0.5) / n, s_j), flat beyond the outermost order statistics.
double GroupQuantile(const std::vector<double>& s, double u) {
  const double n = static_cast<double>(s.size());
  const double pos = u * n - 0.5;
  if (pos <= 0) return s.front();
  if (pos >= n - 1) return s.back();
  const size_t j = static_cast<size_t>(pos);
  const double frac = pos - static_cast<double>(j);
  return s[j] + frac * (s[j + 1] - s[j]);
}

// Inverse of GroupQuantile for an unseen value.
double GroupRank(const std::vector<double>& s, double v) {
  const double n = static_cast<double>(s.size());
  if (v <= s.front()) return 0.5 / n;
  if (v >= s.back()) return (n - 0.5) / n;
  const size_t j = static_cast<size_t>(std::upper_bound(s.begin(), s.end(), v) - s.begin()) - 1;
  const double frac = s[j + 1] > s[j] ? (v - s[j]) / (s[j + 1] - s[j]) : 0.0;
  return (static_cast<double>(j) + 0.5 + frac) / n;
}

}  // namespace

std::string_view MethodName(MitigationMethod method) {
  switch (method) {
    case MitigationMethod::kSup: return "SUP";
    case MitigationMethod::kRw: return "RW";
    case MitigationMethod::kDir: return "DIR";
    case MitigationMethod::kCpp: return "CPP";
    case MitigationMethod::kPsta: return "PSTA";
  }
  return "?";
}

MitigationMethod ParseMethod(std::string_view name) {
  for (auto m : {MitigationMethod::kSup, MitigationMethod::kRw, MitigationMethod::kDir,
                 MitigationMethod::kCpp, MitigationMethod::kPsta}) {
    const std::string_view canonical = MethodName(m);
    if (std::equal(canonical.begin(), canonical.end(), name.begin(), name.end(),
                   [](char a, char b) { return a == std::toupper(static_cast<unsigned char>(b)); })) {
      return m;
    }
  }
  throw Error(ErrorCode::kConfigInvalid, "unknown mitigation method '" + std::string(name) + "'");
}

bool IsPostProcessing(MitigationMethod method) {
  return method == MitigationMethod::kCpp || method == MitigationMethod::kPsta;
}

void MitigationSpec::Validate() const {
  if (protected_attribute.empty()) throw Error(ErrorCode::kConfigInvalid, "mitigation needs a protected attribute");
  if (!(repair_level >= 0 && repair_level <= 1)) {
    throw Error(ErrorCode::kBadLambda, "repair level must be in [0, 1]");
  }
  if (!(grid_step > 0 && grid_step <= 0.5)) {
    throw Error(ErrorCode::kEmptyGrid, "grid_step must be in (0, 0.5]");
  }
  if (!(default_threshold >= 0 && default_threshold <= 1)) {
    throw Error(ErrorCode::kConfigInvalid, "default_threshold must be in [0, 1]");
  }
}

Suppression Suppress(const Cohort& cohort, std::string_view name) {
  const size_t column = cohort.ColumnIndex(name);
  Suppression result{cohort.DropColumn(name), {}, std::nullopt};
  if (cohort.schema()[column].role == ColumnRole::kProtected) {
    result.evaluation_groups = cohort.GroupLabels(name);
  } else {
    result.warning = "suppressed column '" + std::string(name) + "' is not a protected attribute";
  }
  return result;
}

std::vector<double> Reweigh(std::span<const int> groups, std::span<const uint8_t> y) {
  CheckSameLength(groups.size(), y.size(), y.size());
  const double n = static_cast<double>(y.size());
  std::map<int, double> group_count;
  std::map<std::pair<int, int>, double> cell_count;
  double label_count[2] = {0.0, 0.0};
  for (size_t i = 0; i < y.size(); ++i) {
    group_count[groups[i]] += 1.0;
    cell_count[{groups[i], y[i]}] += 1.0;
    label_count[y[i]] += 1.0;
  }
  for (const auto& [g, count] : group_count) {
    for (int c = 0; c < 2; ++c) {
      if (!cell_count.contains({g, c})) {
        throw Error(ErrorCode::kEmptyCell, "group " + std::to_string(g) + " has no samples with label " +
                                               std::to_string(c));
      }
    }
  }
  std::vector<double> weights(y.size());
  for (size_t i = 0; i < y.size(); ++i) {
    weights[i] = group_count[groups[i]] * label_count[y[i]] / (n * cell_count[{groups[i], y[i]}]);
  }
  return weights;
}

std::vector<double> Reweigh(const Cohort& cohort, std::string_view protected_name) {
  const std::vector<int> groups = cohort.GroupLabels(protected_name);
  return Reweigh(groups, cohort.outcome());
}

DisparateImpactRepairer DisparateImpactRepairer::Fit(const Cohort& cohort,
                                                     std::string_view protected_name,
                                                     double repair_level) {
  if (!(repair_level >= 0 && repair_level <= 1)) {
    throw Error(ErrorCode::kBadLambda, "repair level must be in [0, 1]");
  }
  const std::vector<int> groups = cohort.GroupLabels(protected_name);
  const size_t levels = cohort.schema()[cohort.ColumnIndex(protected_name)].levels.size();
  DisparateImpactRepairer repairer;
  repairer.protected_name_ = std::string(protected_name);
  repairer.repair_level_ = repair_level;
  for (size_t c = 0; c < cohort.schema().size(); ++c) {
    const ColumnSpec& spec = cohort.schema()[c];
    if (spec.kind != ColumnKind::kNumeric || spec.role != ColumnRole::kFeature) continue;
    ColumnModel model;
    model.column = c;
    model.order_stats.resize(levels);
    auto values = cohort.values(c);
    for (size_t r = 0; r < values.size(); ++r) {
      if (!std::isnan(values[r])) model.order_stats[static_cast<size_t>(groups[r])].push_back(values[r]);
    }
    for (auto& s : model.order_stats) std::sort(s.begin(), s.end());
    repairer.columns_.push_back(std::move(model));
  }
  return repairer;
}

double DisparateImpactRepairer::MedianQuantile(const ColumnModel& model, double u) const {
  std::vector<double> q;
  for (const auto& s : model.order_stats) {
    if (!s.empty()) q.push_back(GroupQuantile(s, u));
  }
  std::sort(q.begin(), q.end());
  const size_t m = q.size();
  return m % 2 ? q[m / 2] : 0.5 * (q[m / 2 - 1] + q[m / 2]);
}

Cohort DisparateImpactRepairer::Finish(const Cohort& cohort,
                                       std::vector<std::vector<double>> repaired) const {
  Cohort out = cohort;
  for (size_t i = 0; i < columns_.size(); ++i) {
    out = out.WithColumn(columns_[i].column, std::move(repaired[i]));
  }
  return out.DropColumn(protected_name_);
}

Cohort DisparateImpactRepairer::RepairFitted(const Cohort& cohort) const {
  const std::vector<int> groups = cohort.GroupLabels(protected_name_);
  const double lambda = repair_level_;
  std::vector<std::vector<double>> repaired;
  for (const ColumnModel& model : columns_) {
    auto values = cohort.values(model.column);
    std::vector<double> out(values.begin(), values.end());
    std::vector<std::vector<size_t>> members(model.order_stats.size());
    for (size_t r = 0; r < values.size(); ++r) {
      if (!std::isnan(values[r])) members[static_cast<size_t>(groups[r])].push_back(r);
    }
    for (size_t g = 0; g < members.size(); ++g) {
      auto& rows = members[g];
      if (rows.size() != model.order_stats[g].size()) {
        throw Error(ErrorCode::kLengthMismatch, "RepairFitted called on rows it was not fit on");
      }
      std::stable_sort(rows.begin(), rows.end(),
                       [&](size_t a, size_t b) { return values[a] < values[b]; });
      const double n = static_cast<double>(rows.size());
      for (size_t rank = 0; rank < rows.size(); ++rank) {
        const double u = (static_cast<double>(rank) + 0.5) / n;
        const double v = values[rows[rank]];
        out[rows[rank]] = (1.0 - lambda) * v + lambda * MedianQuantile(model, u);
      }
    }
    repaired.push_back(std::move(out));
  }
  return Finish(cohort, std::move(repaired));
}

Cohort DisparateImpactRepairer::Apply(const Cohort& cohort) const {
  const std::vector<int> groups = cohort.GroupLabels(protected_name_);
  const double lambda = repair_level_;
  std::vector<std::vector<double>> repaired;
  for (const ColumnModel& model : columns_) {
    auto values = cohort.values(model.column);
    std::vector<double> out(values.begin(), values.end());
    for (size_t r = 0; r < values.size(); ++r) {
      const size_t g = static_cast<size_t>(groups[r]);
      if (std::isnan(values[r]) || g >= model.order_stats.size() || model.order_stats[g].empty()) continue;
      const double u = GroupRank(model.order_stats[g], values[r]);
      out[r] = (1.0 - lambda) * values[r] + lambda * MedianQuantile(model, u);
    }
    repaired.push_back(std::move(out));
  }
  return Finish(cohort, std::move(repaired));
}

nlohmann::json DisparateImpactRepairer::ToJson() const {
  nlohmann::json columns = nlohmann::json::array();
  for (const ColumnModel& model : columns_) {
    columns.push_back({{"column", model.column}, {"order_stats", model.order_stats}});
  }
  return {{"protected", protected_name_}, {"repair_level", repair_level_}, {"columns", columns}};
}

Cohort DirRepair(const Cohort& cohort, std::string_view protected_name, double repair_level) {
  return DisparateImpactRepairer::Fit(cohort, protected_name, repair_level).RepairFitted(cohort);
}

CppPolicy CppFit(std::span<const double> p, std::span<const uint8_t> y,
                 std::span<const int> groups, uint64_t seed) {
  CheckSameLength(p.size(), y.size(), groups.size());
  struct Tally {
    double rows = 0, positives = 0, miss = 0;
  };
  std::map<int, Tally> tally;
  for (size_t i = 0; i < p.size(); ++i) {
    Tally& t = tally[groups[i]];
    t.rows += 1;
    if (y[i]) {
      t.positives += 1;
      t.miss += 1.0 - p[i];
    }
  }
  CppPolicy policy;
  policy.seed = seed;
  double target = -std::numeric_limits<double>::infinity();
  for (const auto& [g, t] : tally) {
    if (t.positives == 0) throw Error(ErrorCode::kNoPositivesInGroup, "group " + std::to_string(g));
    CppGroup group;
    group.generalized_fnr = t.miss / t.positives;
    group.base_rate = t.positives / t.rows;
    policy.groups[g] = group;
    target = std::max(target, group.generalized_fnr);
  }
  // Every group is mixed toward its base rate until its generalized FNR meets
  // the largest one; for two groups only the lower-FNR group moves.
  for (auto& [g, group] : policy.groups) {
    const double reach = (1.0 - group.base_rate) - group.generalized_fnr;
    if (group.generalized_fnr < target) {
      group.reachable = reach >= target - group.generalized_fnr;
      if (reach > 0) group.mix_rate = std::clamp((target - group.generalized_fnr) / reach, 0.0, 1.0);
    }
    group.equalized_fnr =
        (1.0 - group.mix_rate) * group.generalized_fnr + group.mix_rate * (1.0 - group.base_rate);
  }
  return policy;
}

std::vector<double> CppApply(const CppPolicy& policy, std::span<const double> p,
                             std::span<const int> groups, size_t* unknown_rows) {
  CheckSameLength(p.size(), groups.size(), groups.size());
  std::vector<double> out(p.begin(), p.end());
  size_t unknown = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    auto it = policy.groups.find(groups[i]);
    if (it == policy.groups.end()) {
      ++unknown;
      continue;
    }
    if (CounterUniform(policy.seed, i) < it->second.mix_rate) out[i] = it->second.base_rate;
  }
  if (unknown_rows) *unknown_rows = unknown;
  return out;
}

std::vector<double> ThresholdGrid(double step) {
  if (!(step > 0 && step <= 0.5)) throw Error(ErrorCode::kEmptyGrid, "grid_step must be in (0, 0.5]");
  std::vector<double> grid;
  const double steps = std::round(1.0 / step);
  if (std::abs(steps * step - 1.0) < 1e-9) {
    const int n = static_cast<int>(steps);
    for (int i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / n);
    return grid;
  }
  for (int i = 0; i * step <= 1.0; ++i) grid.push_back(i * step);
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

ThresholdPolicy PstaFit(std::span<const double> p, std::span<const uint8_t> y,
                        std::span<const int> groups, const PstaOptions& options) {
  CheckSameLength(p.size(), y.size(), groups.size());
  const std::vector<double> grid = ThresholdGrid(options.grid_step);
  const double base = options.default_threshold;

  // Positive-class scores per group.
  std::map<int, std::vector<double>> positives;
  std::set<int> present;
  double hits = 0, total = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    present.insert(groups[i]);
    if (!y[i]) continue;
    positives[groups[i]].push_back(p[i]);
    total += 1;
    if (p[i] >= base) hits += 1;
  }
  for (int g : present) {
    if (!positives.contains(g)) throw Error(ErrorCode::kNoPositivesInGroup, "group " + std::to_string(g));
  }
  auto sensitivity = [&](int g, double threshold) {
    const auto& s = positives.at(g);
    const auto count = std::count_if(s.begin(), s.end(), [&](double v) { return v >= threshold; });
    return static_cast<double>(count) / static_cast<double>(s.size());
  };

  ThresholdPolicy policy;
  policy.default_threshold = base;
  policy.overall_sensitivity = hits / total;
  if (options.unprivileged) {
    for (int g : *options.unprivileged) {
      if (!positives.contains(g)) throw Error(ErrorCode::kNoPositivesInGroup, "group " + std::to_string(g));
      policy.unprivileged.push_back(g);
    }
    std::sort(policy.unprivileged.begin(), policy.unprivileged.end());
    policy.unprivileged.erase(std::unique(policy.unprivileged.begin(), policy.unprivileged.end()),
                              policy.unprivileged.end());
  } else {
    for (int g : present) {
      if (sensitivity(g, base) < policy.overall_sensitivity) policy.unprivileged.push_back(g);
    }
  }
  for (int g = 0; g < options.num_levels; ++g) policy.thresholds[g] = base;
  for (int g : present) policy.thresholds[g] = base;

  // |TP_u / P_u - hits / total| compared exactly as |TP_u * total - hits * P_u|.
  const auto total_count = static_cast<int64_t>(total);
  const auto hit_count = static_cast<int64_t>(hits);
  for (int u : policy.unprivileged) {
    const auto& scores = positives.at(u);
    const auto group_positives = static_cast<int64_t>(scores.size());
    int64_t best_gap = std::numeric_limits<int64_t>::max();
    double best = base;
    // `<=` keeps the largest minimizer: the least FPR among equal-gap choices.
    for (double threshold : grid) {
      const auto tp = static_cast<int64_t>(
          std::count_if(scores.begin(), scores.end(), [&](double v) { return v >= threshold; }));
      const int64_t gap = std::abs(tp * total_count - hit_count * group_positives);
      if (gap <= best_gap) {
        best_gap = gap;
        best = threshold;
      }
    }
    policy.thresholds[u] = best;
  }
  return policy;
}

ThresholdApplication ApplyThresholds(std::span<const double> p, std::span<const int> groups,
                                     const ThresholdPolicy& policy) {
  CheckSameLength(p.size(), groups.size(), groups.size());
  ThresholdApplication result;
  result.predictions.resize(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    auto it = policy.thresholds.find(groups[i]);
    double threshold = policy.default_threshold;
    if (it == policy.thresholds.end()) ++result.unknown_group_rows;
    else threshold = it->second;
    result.predictions[i] = p[i] >= threshold ? 1 : 0;
  }
  return result;
}

nlohmann::json ThresholdPolicyToJson(const ThresholdPolicy& policy,
                                     std::span<const std::string> levels) {
  nlohmann::json thresholds = nlohmann::json::object();
  for (const auto& [g, t] : policy.thresholds) thresholds[LevelName(levels, g)] = t;
  nlohmann::json unprivileged = nlohmann::json::array();
  for (int g : policy.unprivileged) unprivileged.push_back(LevelName(levels, g));
  return {{"thresholds", thresholds},
          {"default_threshold", policy.default_threshold},
          {"unprivileged", unprivileged},
          {"overall_sensitivity", policy.overall_sensitivity}};
}

nlohmann::json CppPolicyToJson(const CppPolicy& policy, std::span<const std::string> levels) {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [g, c] : policy.groups) {
    groups[LevelName(levels, g)] = {{"mix_rate", c.mix_rate},
                                    {"base_rate", c.base_rate},
                                    {"generalized_fnr", c.generalized_fnr},
                                    {"equalized_fnr", c.equalized_fnr},
                                    {"reachable", c.reachable}};
  }
  return {{"groups", groups}, {"seed", policy.seed}};
}

}  // namespace fairaudit
