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

#ifndef FAIRAUDIT_MODELS_H_
#define FAIRAUDIT_MODELS_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fairaudit/cohort.h"
#include "fairaudit/matrix.h"
#include "json.hpp"

namespace fairaudit {

struct LogisticConfig {
  // Penalty on the mean weighted log-loss, so it is relative to total weight.
  double l2_strength = 1e-3;
  int max_iterations = 100;
  // Stop when the objective gradient max-norm falls to this.
  double tolerance = 1e-10;
  bool standardize = true;

  void Validate() const;
  bool operator==(const LogisticConfig&) const = default;
};

struct GbtConfig {
  int rounds = 50;
  int max_depth = 2;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  uint64_t subsample_seed = 0;
  // Row fraction per round; 1 disables sampling.
  double subsample = 1.0;
  // L2 penalty on leaf values.
  double reg_lambda = 1.0;

  void Validate() const;
  bool operator==(const GbtConfig&) const = default;
};

using ModelConfig = std::variant<LogisticConfig, GbtConfig>;
enum class ModelKind { kLogistic, kGbt };

struct LogisticParams {
  double intercept = 0.0;
  // In the (possibly standardized) training feature space.
  std::vector<double> coefficients;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf margin contribution, learning rate applied
  double gain = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double Predict(std::span<const double> row) const;
};

struct GbtParams {
  double base_margin = 0.0;
  std::vector<Tree> trees;
};

struct TrainedModel {
  std::variant<LogisticParams, GbtParams> params;
  std::vector<std::string> feature_names;
  // Applied as (x - mean) / scale before the linear predictor; empty when
  // the model was trained without standardization.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  // Weighted training standard deviation of every raw feature.
  std::vector<double> feature_sd;
  bool converged = true;
  int iterations = 0;
  // Objective after each accepted iteration (logistic) or round (gbt).
  std::vector<double> loss_trace;

  ModelKind kind() const {
    return std::holds_alternative<LogisticParams>(params) ? ModelKind::kLogistic : ModelKind::kGbt;
  }
};

// Penalized mean weighted negative log-likelihood of a logistic model on a
// fixed design. beta[0] is the unpenalized intercept.
class LogisticObjective {
 public:
  LogisticObjective(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w,
                    double l2_strength);

  double Value(std::span<const double> beta) const;
  std::vector<double> Gradient(std::span<const double> beta) const;
  size_t dimension() const { return x_.cols + 1; }

 private:
  const Matrix& x_;
  std::span<const uint8_t> y_;
  std::span<const double> w_;
  double l2_;
  double total_weight_;
};

TrainedModel TrainLogistic(const Matrix& x, std::span<const uint8_t> y,
                           std::span<const double> w, const LogisticConfig& config);
TrainedModel TrainGbt(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w,
                      const GbtConfig& config);
TrainedModel Train(const ModelConfig& config, const Matrix& x, std::span<const uint8_t> y,
                   std::span<const double> w);

std::vector<double> PredictProba(const TrainedModel& model, const Matrix& x);

// Descending score; ties keep feature order.
std::vector<std::pair<std::string, double>> FeatureImportance(const TrainedModel& model);

enum class SelectionMetric { kBalancedAccuracy, kAuc };

struct GridSelection {
  size_t best_index = 0;
  std::vector<double> mean_scores;
  // Held-out inner predictions of the selected config, aligned with
  // `InnerPlan::rows`. Filled only when requested.
  std::vector<double> out_of_fold;
};

// Mean inner-fold validation score per grid entry over one inner plan. `x`
// may contain NaN; imputation is fit on each inner training split.
GridSelection SelectConfig(const Matrix& x, std::span<const uint8_t> y,
                           std::span<const double> w, std::span<const ModelConfig> grid,
                           const InnerPlan& inner, SelectionMetric metric,
                           bool keep_out_of_fold = false);

// Best grid index per outer fold; ties go to the earliest entry.
std::vector<size_t> GridSearch(const Matrix& x, std::span<const uint8_t> y,
                               std::span<const double> w, std::span<const ModelConfig> grid,
                               const NestedPlan& folds, SelectionMetric metric);
std::vector<size_t> GridSearch(const Cohort& cohort, std::span<const ModelConfig> grid,
                               const NestedPlan& folds, SelectionMetric metric);

nlohmann::json ModelToJson(const TrainedModel& model);
TrainedModel ModelFromJson(const nlohmann::json& doc);
nlohmann::json ConfigToJson(const ModelConfig& config);
ModelConfig ConfigFromJson(const nlohmann::json& doc);

std::vector<ModelConfig> DefaultLogisticGrid();
std::vector<ModelConfig> DefaultGbtGrid();

}  // namespace fairaudit

#endif  // FAIRAUDIT_MODELS_H_
