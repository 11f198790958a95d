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

#ifndef FAIRAUDIT_KERNELS_H_
#define FAIRAUDIT_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairaudit/matrix.h"

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP variant; the OpenMP variants produce results that do not depend on
// the thread count (fixed-size blocks reduced in block order).
namespace fairaudit::kernels {

// Rows per reduction block in the parallel logistic kernel.
inline constexpr size_t kBlockRows = 512;

// Weighted logistic log-loss sums at `beta` (beta[0] is the intercept,
// beta[1 + j] multiplies column j). Gradient has x.cols + 1 entries; the
// Hessian is dense (x.cols + 1)^2 row-major when requested, empty otherwise.
struct LogisticTerms {
  double loss = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;
};

LogisticTerms LogisticSerial(const Matrix& x, std::span<const uint8_t> y,
                             std::span<const double> w, std::span<const double> beta,
                             bool with_hessian);
LogisticTerms LogisticParallel(const Matrix& x, std::span<const uint8_t> y,
                               std::span<const double> w, std::span<const double> beta,
                               bool with_hessian);

// Numerically stable log(1 + exp(z)).
double Softplus(double z);
double Sigmoid(double z);

// Best split of every open tree node at one depth, found by an exact greedy
// scan over presorted feature orders.
struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;  // left iff value <= threshold
  double gain = 0.0;
  double left_grad = 0.0;
  double left_hess = 0.0;
};

struct SplitProblem {
  const Matrix* x = nullptr;
  // sorted_rows[j]: row ids ordered by (x(r, j), r).
  const std::vector<std::vector<uint32_t>>* sorted_rows = nullptr;
  std::span<const double> grad;
  std::span<const double> hess;
  // Open node id of each row at this depth, -1 when the row is inactive.
  std::span<const int> node_of_row;
  std::span<const double> node_grad;
  std::span<const double> node_hess;
  double reg_lambda = 1.0;
  double min_child_weight = 0.0;
};

std::vector<SplitCandidate> BestSplitsSerial(const SplitProblem& problem);
std::vector<SplitCandidate> BestSplitsParallel(const SplitProblem& problem);

// Threads the OpenMP variants will use (1 when built without OpenMP).
int MaxThreads();

}  // namespace fairaudit::kernels

#endif  // FAIRAUDIT_KERNELS_H_
