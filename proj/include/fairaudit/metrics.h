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

#ifndef FAIRAUDIT_METRICS_H_
#define FAIRAUDIT_METRICS_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace fairaudit {

// Weighted confusion counts; unit weights give plain counts.
struct ConfusionCounts {
  double tp = 0.0;
  double fp = 0.0;
  double tn = 0.0;
  double fn = 0.0;

  // Throw kUndefinedRate when the denominator class is empty.
  double Tpr() const;
  double Fpr() const;
  double Tnr() const;

  ConfusionCounts& operator+=(const ConfusionCounts& other);
  bool operator==(const ConfusionCounts&) const = default;
};

// Predicted positive iff p >= threshold. Empty `w` means unit weights.
ConfusionCounts ConfusionAtThreshold(std::span<const double> p, std::span<const uint8_t> y,
                                     double threshold, std::span<const double> w = {});
ConfusionCounts ConfusionFromPredictions(std::span<const uint8_t> predicted,
                                         std::span<const uint8_t> y,
                                         std::span<const double> w = {});

// TPR per group id under a shared threshold or per-group thresholds
// (`thresholds[group]`). Throws kNoPositivesInGroup naming the group.
std::map<int, double> GroupTpr(std::span<const double> p, std::span<const uint8_t> y,
                               std::span<const int> groups, double threshold);
std::map<int, double> GroupTpr(std::span<const double> p, std::span<const uint8_t> y,
                               std::span<const int> groups, const std::map<int, double>& thresholds);

// Equal opportunity difference: TPR(unprivileged) - TPR(privileged).
double Eod(double tpr_unprivileged, double tpr_privileged);
// Discrimination level: absolute TPR gap.
double Gamma(double tpr_a, double tpr_b);

double BalancedAccuracy(const ConfusionCounts& counts);

// Weighted Mann-Whitney AUC with half credit for tied scores.
double AucRoc(std::span<const double> p, std::span<const uint8_t> y,
              std::span<const double> w = {});

// Studentized range distribution for `groups` means and `df` error degrees
// of freedom.
double StudentizedRangeCdf(double q, int groups, double df);
// Inverts the CDF by bisection to within `tolerance` in q.
double StudentizedRangeQuantile(double probability, int groups, double df,
                                double tolerance = 1e-10);

double StudentTQuantile(double probability, double df);

struct TukeyResult {
  int groups = 0;
  int folds = 0;
  int df = 0;
  double q_critical = 0.0;
  double ms_within = 0.0;
  // |mean_i - mean_j| above this is significant.
  double pairwise_threshold = 0.0;
  std::vector<double> means;
  // Display half-width per group: (q / sqrt 2) * sqrt(MS_within / k).
  std::vector<double> half_widths;
  std::vector<std::vector<bool>> significant;
};

// Tukey HSD on a one-way layout: groups are treatments, CV folds replicates.
TukeyResult TukeyTprTest(const std::vector<std::vector<double>>& per_group_fold_tprs,
                         double alpha);

}  // namespace fairaudit

#endif  // FAIRAUDIT_METRICS_H_
