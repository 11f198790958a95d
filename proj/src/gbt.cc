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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairaudit/error.h"
#include "fairaudit/kernels.h"
#include "fairaudit/models.h"
#include "fairaudit/rng.h"
#include "model_internal.h"

namespace fairaudit {
namespace {

double MeanLogLoss(std::span<const double> margin, std::span<const uint8_t> y,
                   std::span<const double> w, double total_weight) {
  double loss = 0.0;
  for (size_t i = 0; i < margin.size(); ++i) {
    loss += w[i] * (kernels::Softplus(margin[i]) - y[i] * margin[i]);
  }
  return loss / total_weight;
}

std::vector<std::vector<uint32_t>> PresortColumns(const Matrix& x) {
  std::vector<std::vector<uint32_t>> sorted(x.cols);
  for (size_t j = 0; j < x.cols; ++j) {
    auto& order = sorted[j];
    order.resize(x.rows);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return x(a, j) < x(b, j); });
  }
  return sorted;
}

Tree GrowTree(const Matrix& x, const std::vector<std::vector<uint32_t>>& sorted,
              std::span<const double> grad, std::span<const double> hess,
              std::vector<int> node_of_row, const GbtConfig& config) {
  Tree tree;
  tree.nodes.emplace_back();
  std::vector<int> open = {0};  // tree node id of each open node
  std::vector<double> open_grad(1, 0.0), open_hess(1, 0.0);
  for (size_t r = 0; r < x.rows; ++r) {
    if (node_of_row[r] < 0) continue;
    open_grad[0] += grad[r];
    open_hess[0] += hess[r];
  }
  auto make_leaf = [&](int node, double g, double h) {
    tree.nodes[static_cast<size_t>(node)].value =
        -config.learning_rate * g / (h + config.reg_lambda);
  };

  for (int depth = 0; depth < config.max_depth && !open.empty(); ++depth) {
    kernels::SplitProblem problem;
    problem.x = &x;
    problem.sorted_rows = &sorted;
    problem.grad = grad;
    problem.hess = hess;
    problem.node_of_row = node_of_row;
    problem.node_grad = open_grad;
    problem.node_hess = open_hess;
    problem.reg_lambda = config.reg_lambda;
    problem.min_child_weight = config.min_child_weight;
    const std::vector<kernels::SplitCandidate> splits = kernels::BestSplitsParallel(problem);

    std::vector<int> next_open;
    std::vector<double> next_grad, next_hess;
    // Open index of the left child per current open node, -1 for new leaves.
    std::vector<int> left_slot(open.size(), -1);
    for (size_t k = 0; k < open.size(); ++k) {
      const kernels::SplitCandidate& split = splits[k];
      if (split.feature < 0) {
        make_leaf(open[k], open_grad[k], open_hess[k]);
        continue;
      }
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[static_cast<size_t>(open[k])];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.gain = split.gain;
      node.left = left;
      node.right = left + 1;
      left_slot[k] = static_cast<int>(next_open.size());
      next_open.push_back(left);
      next_open.push_back(left + 1);
      next_grad.push_back(split.left_grad);
      next_grad.push_back(open_grad[k] - split.left_grad);
      next_hess.push_back(split.left_hess);
      next_hess.push_back(open_hess[k] - split.left_hess);
    }
    for (size_t r = 0; r < x.rows; ++r) {
      const int k = node_of_row[r];
      if (k < 0) continue;
      const int slot = left_slot[static_cast<size_t>(k)];
      if (slot < 0) {
        node_of_row[r] = -1;
        continue;
      }
      const TreeNode& node = tree.nodes[static_cast<size_t>(open[static_cast<size_t>(k)])];
      node_of_row[r] = x(r, static_cast<size_t>(node.feature)) <= node.threshold ? slot : slot + 1;
    }
    open = std::move(next_open);
    open_grad = std::move(next_grad);
    open_hess = std::move(next_hess);
  }
  for (size_t k = 0; k < open.size(); ++k) make_leaf(open[k], open_grad[k], open_hess[k]);
  return tree;
}

}  // namespace

void GbtConfig::Validate() const {
  if (rounds < 1) throw Error(ErrorCode::kConfigInvalid, "rounds must be >= 1");
  if (max_depth < 1) throw Error(ErrorCode::kConfigInvalid, "max_depth must be >= 1");
  if (!(learning_rate > 0 && learning_rate <= 1)) {
    throw Error(ErrorCode::kConfigInvalid, "learning_rate must be in (0, 1]");
  }
  if (!(min_child_weight >= 0)) throw Error(ErrorCode::kConfigInvalid, "min_child_weight must be >= 0");
  if (!(subsample > 0 && subsample <= 1)) throw Error(ErrorCode::kConfigInvalid, "subsample must be in (0, 1]");
  if (!(reg_lambda >= 0)) throw Error(ErrorCode::kConfigInvalid, "reg_lambda must be >= 0");
}

double Tree::Predict(std::span<const double> row) const {
  size_t node = 0;
  while (nodes[node].feature >= 0) {
    const TreeNode& n = nodes[node];
    node = static_cast<size_t>(row[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes[node].value;
}

TrainedModel TrainGbt(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w,
                      const GbtConfig& config) {
  config.Validate();
  internal::CheckTrainingInputs(x, y, w);
  const size_t n = x.rows;
  const double total_weight = std::accumulate(w.begin(), w.end(), 0.0);
  double positive_weight = 0.0;
  for (size_t i = 0; i < n; ++i) positive_weight += y[i] * w[i];
  const double prior = positive_weight / total_weight;

  GbtParams params;
  params.base_margin = std::log(prior / (1.0 - prior));
  std::vector<double> margin(n, params.base_margin);
  std::vector<double> grad(n), hess(n);
  const auto sorted = PresortColumns(x);

  TrainedModel model;
  model.feature_names = x.names;
  model.feature_sd.assign(x.cols, 0.0);
  model.loss_trace.push_back(MeanLogLoss(margin, y, w, total_weight));
  for (int round = 0; round < config.rounds; ++round) {
    std::vector<int> node_of_row(n, 0);
    for (size_t i = 0; i < n; ++i) {
      const double p = kernels::Sigmoid(margin[i]);
      grad[i] = w[i] * (p - y[i]);
      hess[i] = w[i] * p * (1.0 - p);
      if (w[i] == 0.0) node_of_row[i] = -1;
      if (config.subsample < 1.0 &&
          CounterUniform(config.subsample_seed, static_cast<uint64_t>(round) * n + i) >= config.subsample) {
        node_of_row[i] = -1;
      }
    }
    Tree tree = GrowTree(x, sorted, grad, hess, std::move(node_of_row), config);
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      margin[static_cast<size_t>(i)] += tree.Predict(x.Row(static_cast<size_t>(i)));
    }
    params.trees.push_back(std::move(tree));
    model.loss_trace.push_back(MeanLogLoss(margin, y, w, total_weight));
  }
  model.iterations = config.rounds;
  model.params = std::move(params);
  return model;
}

}  // namespace fairaudit
