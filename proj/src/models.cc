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

#include "fairaudit/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairaudit/error.h"
#include "fairaudit/kernels.h"
#include "fairaudit/metrics.h"
#include "model_internal.h"

namespace fairaudit {

namespace internal {

void CheckTrainingInputs(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w) {
  if (x.rows != y.size() || x.rows != w.size()) {
    throw Error(ErrorCode::kLengthMismatch, "rows(X), len(y) and len(w) differ");
  }
  bool has_pos = false, has_neg = false;
  for (size_t i = 0; i < x.rows; ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0) throw Error(ErrorCode::kBadValue, "invalid sample weight");
    if (w[i] > 0) (y[i] ? has_pos : has_neg) = true;
  }
  for (double v : x.data) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kBadValue, "non-finite feature value; impute first");
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kDegenerateLabels, "training data holds a single weighted class");
  }
}

}  // namespace internal

TrainedModel Train(const ModelConfig& config, const Matrix& x, std::span<const uint8_t> y,
                   std::span<const double> w) {
  return std::visit(
      [&](const auto& cfg) {
        using T = std::decay_t<decltype(cfg)>;
        if constexpr (std::is_same_v<T, LogisticConfig>) return TrainLogistic(x, y, w, cfg);
        else return TrainGbt(x, y, w, cfg);
      },
      config);
}

std::vector<double> PredictProba(const TrainedModel& model, const Matrix& x) {
  if (x.cols != model.feature_names.size() || (!x.names.empty() && x.names != model.feature_names)) {
    throw Error(ErrorCode::kFeatureMismatch,
                "model expects " + std::to_string(model.feature_names.size()) + " features, got " +
                    std::to_string(x.cols));
  }
  std::vector<double> proba(x.rows);
  if (const auto* lr = std::get_if<LogisticParams>(&model.params)) {
    const bool standardized = !model.feature_mean.empty();
    for (size_t r = 0; r < x.rows; ++r) {
      double z = lr->intercept;
      for (size_t j = 0; j < x.cols; ++j) {
        const double v = standardized ? (x(r, j) - model.feature_mean[j]) / model.feature_scale[j]
                                      : x(r, j);
        z += v * lr->coefficients[j];
      }
      proba[r] = kernels::Sigmoid(z);
    }
    return proba;
  }
  const auto& gbt = std::get<GbtParams>(model.params);
  const auto rows = static_cast<std::ptrdiff_t>(x.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const size_t r = static_cast<size_t>(i);
    double margin = gbt.base_margin;
    for (const Tree& tree : gbt.trees) margin += tree.Predict(x.Row(r));
    proba[r] = kernels::Sigmoid(margin);
  }
  return proba;
}

std::vector<std::pair<std::string, double>> FeatureImportance(const TrainedModel& model) {
  const size_t p = model.feature_names.size();
  std::vector<double> score(p, 0.0);
  if (const auto* lr = std::get_if<LogisticParams>(&model.params)) {
    for (size_t j = 0; j < p; ++j) {
      const double scale = model.feature_scale.empty() ? 1.0 : model.feature_scale[j];
      score[j] = std::abs(lr->coefficients[j]) / scale * model.feature_sd[j];
    }
  } else {
    for (const Tree& tree : std::get<GbtParams>(model.params).trees) {
      for (const TreeNode& node : tree.nodes) {
        if (node.feature >= 0) score[static_cast<size_t>(node.feature)] += node.gain;
      }
    }
  }
  std::vector<size_t> order(p);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return score[a] > score[b]; });
  std::vector<std::pair<std::string, double>> ranked;
  for (size_t j : order) ranked.emplace_back(model.feature_names[j], score[j]);
  return ranked;
}

GridSelection SelectConfig(const Matrix& x, std::span<const uint8_t> y,
                           std::span<const double> w, std::span<const ModelConfig> grid,
                           const InnerPlan& inner, SelectionMetric metric,
                           bool keep_out_of_fold) {
  if (grid.empty()) throw Error(ErrorCode::kEmptyGrid, "hyper-parameter grid is empty");
  GridSelection selection;
  selection.mean_scores.assign(grid.size(), 0.0);
  std::vector<std::vector<double>> held_out;
  if (keep_out_of_fold) held_out.assign(grid.size(), std::vector<double>(inner.rows.size(), 0.0));
  const int k = inner.plan.k;
  for (int f = 0; f < k; ++f) {
    std::vector<size_t> train_ids, valid_ids;
    for (size_t pos : inner.plan.TrainRows(f)) train_ids.push_back(inner.rows[pos]);
    const std::vector<size_t> valid_pos = inner.plan.TestRows(f);
    for (size_t pos : valid_pos) valid_ids.push_back(inner.rows[pos]);
    Matrix x_train = x.SelectRows(train_ids);
    Matrix x_valid = x.SelectRows(valid_ids);
    const MedianImputer imputer = [&] {
      std::vector<size_t> all(x_train.rows);
      std::iota(all.begin(), all.end(), size_t{0});
      return MedianImputer::Fit(x_train, all);
    }();
    imputer.Apply(x_train);
    imputer.Apply(x_valid);
    const auto y_train = Gather(y, train_ids);
    const auto w_train = Gather(w, train_ids);
    const auto y_valid = Gather(y, valid_ids);
    for (size_t g = 0; g < grid.size(); ++g) {
      const TrainedModel model = Train(grid[g], x_train, y_train, w_train);
      const std::vector<double> p = PredictProba(model, x_valid);
      const double score = metric == SelectionMetric::kAuc
                               ? AucRoc(p, y_valid)
                               : BalancedAccuracy(ConfusionAtThreshold(p, y_valid, 0.5));
      selection.mean_scores[g] += score / k;
      if (keep_out_of_fold) {
        for (size_t i = 0; i < valid_pos.size(); ++i) held_out[g][valid_pos[i]] = p[i];
      }
    }
  }
  for (size_t g = 1; g < grid.size(); ++g) {
    if (selection.mean_scores[g] > selection.mean_scores[selection.best_index]) selection.best_index = g;
  }
  if (keep_out_of_fold) selection.out_of_fold = std::move(held_out[selection.best_index]);
  return selection;
}

std::vector<size_t> GridSearch(const Matrix& x, std::span<const uint8_t> y,
                               std::span<const double> w, std::span<const ModelConfig> grid,
                               const NestedPlan& folds, SelectionMetric metric) {
  std::vector<size_t> best;
  for (const InnerPlan& inner : folds.inner) {
    best.push_back(SelectConfig(x, y, w, grid, inner, metric).best_index);
  }
  return best;
}

std::vector<size_t> GridSearch(const Cohort& cohort, std::span<const ModelConfig> grid,
                               const NestedPlan& folds, SelectionMetric metric) {
  return GridSearch(EncodeFeatures(cohort), cohort.outcome(), cohort.weights(), grid, folds, metric);
}

std::vector<ModelConfig> DefaultLogisticGrid() {
  std::vector<ModelConfig> grid;
  for (double l2 : {1e-3, 1e-1, 1e1}) {
    LogisticConfig cfg;
    cfg.l2_strength = l2;
    grid.emplace_back(cfg);
  }
  return grid;
}

std::vector<ModelConfig> DefaultGbtGrid() {
  std::vector<ModelConfig> grid;
  for (int rounds : {50, 200}) {
    for (int depth : {2, 4}) {
      for (double lr : {0.1, 0.3}) {
        GbtConfig cfg;
        cfg.rounds = rounds;
        cfg.max_depth = depth;
        cfg.learning_rate = lr;
        grid.emplace_back(cfg);
      }
    }
  }
  return grid;
}

}  // namespace fairaudit
