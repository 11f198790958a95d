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
#include <limits>

#include "fairaudit/kernels.h"
#include "kernels_internal.h"

namespace fairaudit::kernels {

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace internal {

void AccumulateLogisticRows(const Matrix& x, std::span<const uint8_t> y,
                            std::span<const double> w, std::span<const double> beta,
                            size_t begin, size_t end, bool with_hessian, LogisticTerms& out) {
  const size_t d = x.cols + 1;
  for (size_t r = begin; r < end; ++r) {
    const double wr = w[r];
    if (wr == 0.0) continue;
    auto row = x.Row(r);
    double z = beta[0];
    for (size_t j = 0; j < x.cols; ++j) z += row[j] * beta[j + 1];
    const double p = Sigmoid(z);
    const double label = y[r];
    out.loss += wr * (Softplus(z) - label * z);
    const double g = wr * (p - label);
    out.gradient[0] += g;
    for (size_t j = 0; j < x.cols; ++j) out.gradient[j + 1] += g * row[j];
    if (!with_hessian) continue;
    const double h = wr * p * (1.0 - p);
    double* hess = out.hessian.data();
    hess[0] += h;
    for (size_t j = 0; j < x.cols; ++j) {
      const double hj = h * row[j];
      hess[j + 1] += hj;
      double* hrow = hess + (j + 1) * d;
      for (size_t k = j; k < x.cols; ++k) hrow[k + 1] += hj * row[k];
    }
  }
}

void ScanFeature(const SplitProblem& problem, int feature, std::span<SplitCandidate> best) {
  const Matrix& x = *problem.x;
  const auto& order = (*problem.sorted_rows)[static_cast<size_t>(feature)];
  const size_t nodes = problem.node_grad.size();
  std::vector<double> left_g(nodes, 0.0), left_h(nodes, 0.0);
  std::vector<double> last(nodes, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(nodes, 0);
  const double lambda = problem.reg_lambda;
  for (uint32_t r : order) {
    const int node = problem.node_of_row[r];
    if (node < 0) continue;
    const size_t k = static_cast<size_t>(node);
    const double value = x(r, static_cast<size_t>(feature));
    if (seen[k] && value != last[k]) {
      const double gl = left_g[k], hl = left_h[k];
      const double gt = problem.node_grad[k], ht = problem.node_hess[k];
      const double gr = gt - gl, hr = ht - hl;
      if (hl >= problem.min_child_weight && hr >= problem.min_child_weight) {
        const double parent = gt * gt / (ht + lambda);
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
        // Splits within rounding noise of the parent score are rejected.
        if (gain > 1e-9 * parent + 1e-12 && gain > best[k].gain) {
          double threshold = last[k] + 0.5 * (value - last[k]);
          if (threshold >= value) threshold = last[k];
          best[k] = {feature, threshold, gain, gl, hl};
        }
      }
    }
    seen[k] = 1;
    last[k] = value;
    left_g[k] += problem.grad[r];
    left_h[k] += problem.hess[r];
  }
}

std::vector<SplitCandidate> ReduceCandidates(std::span<const SplitCandidate> per_feature,
                                             size_t num_features, size_t num_nodes) {
  std::vector<SplitCandidate> best(num_nodes);
  for (size_t j = 0; j < num_features; ++j) {
    for (size_t k = 0; k < num_nodes; ++k) {
      const SplitCandidate& c = per_feature[j * num_nodes + k];
      if (c.feature >= 0 && c.gain > best[k].gain) best[k] = c;
    }
  }
  return best;
}

}  // namespace internal

LogisticTerms LogisticSerial(const Matrix& x, std::span<const uint8_t> y,
                             std::span<const double> w, std::span<const double> beta,
                             bool with_hessian) {
  const size_t d = x.cols + 1;
  LogisticTerms out;
  out.gradient.assign(d, 0.0);
  if (with_hessian) out.hessian.assign(d * d, 0.0);
  internal::AccumulateLogisticRows(x, y, w, beta, 0, x.rows, with_hessian, out);
  for (size_t a = 0; a < d && with_hessian; ++a) {
    for (size_t b = 0; b < a; ++b) out.hessian[a * d + b] = out.hessian[b * d + a];
  }
  return out;
}

std::vector<SplitCandidate> BestSplitsSerial(const SplitProblem& problem) {
  const size_t features = problem.x->cols;
  const size_t nodes = problem.node_grad.size();
  std::vector<SplitCandidate> per_feature(features * nodes);
  for (size_t j = 0; j < features; ++j) {
    internal::ScanFeature(problem, static_cast<int>(j),
                          std::span(per_feature).subspan(j * nodes, nodes));
  }
  return internal::ReduceCandidates(per_feature, features, nodes);
}

}  // namespace fairaudit::kernels
