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

#include "fairaudit/kernels.h"
#include "kernels_internal.h"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace fairaudit::kernels {

int MaxThreads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

LogisticTerms LogisticParallel(const Matrix& x, std::span<const uint8_t> y,
                               std::span<const double> w, std::span<const double> beta,
                               bool with_hessian) {
  const size_t d = x.cols + 1;
  const size_t blocks = std::max<size_t>(1, (x.rows + kBlockRows - 1) / kBlockRows);
  std::vector<LogisticTerms> partial(blocks);
  const auto num_blocks = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < num_blocks; ++b) {
    LogisticTerms& part = partial[static_cast<size_t>(b)];
    part.gradient.assign(d, 0.0);
    if (with_hessian) part.hessian.assign(d * d, 0.0);
    const size_t begin = static_cast<size_t>(b) * kBlockRows;
    const size_t end = std::min(x.rows, begin + kBlockRows);
    internal::AccumulateLogisticRows(x, y, w, beta, begin, end, with_hessian, part);
  }
  LogisticTerms out = std::move(partial[0]);
  for (size_t b = 1; b < blocks; ++b) {
    out.loss += partial[b].loss;
    for (size_t i = 0; i < d; ++i) out.gradient[i] += partial[b].gradient[i];
    for (size_t i = 0; i < out.hessian.size(); ++i) out.hessian[i] += partial[b].hessian[i];
  }
  for (size_t a = 0; a < d && with_hessian; ++a) {
    for (size_t c = 0; c < a; ++c) out.hessian[a * d + c] = out.hessian[c * d + a];
  }
  return out;
}

std::vector<SplitCandidate> BestSplitsParallel(const SplitProblem& problem) {
  const size_t features = problem.x->cols;
  const size_t nodes = problem.node_grad.size();
  std::vector<SplitCandidate> per_feature(features * nodes);
  const auto num_features = static_cast<std::ptrdiff_t>(features);
#pragma omp parallel for schedule(dynamic, 1) if (features > 1)
  for (std::ptrdiff_t j = 0; j < num_features; ++j) {
    const size_t f = static_cast<size_t>(j);
    internal::ScanFeature(problem, static_cast<int>(j),
                          std::span(per_feature).subspan(f * nodes, nodes));
  }
  return internal::ReduceCandidates(per_feature, features, nodes);
}

}  // namespace fairaudit::kernels
