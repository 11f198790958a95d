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

#ifndef FAIRAUDIT_KERNELS_INTERNAL_H_
#define FAIRAUDIT_KERNELS_INTERNAL_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

#include "fairaudit/kernels.h"

namespace fairaudit::kernels::internal {

// Adds rows [begin, end) into `out`, which must be zero-initialized and sized.
void AccumulateLogisticRows(const Matrix& x, std::span<const uint8_t> y,
                            std::span<const double> w, std::span<const double> beta,
                            size_t begin, size_t end, bool with_hessian, LogisticTerms& out);

// Scans one feature for every open node; writes best-per-node into `best`.
void ScanFeature(const SplitProblem& problem, int feature, std::span<SplitCandidate> best);

// Reduces per-feature candidates (feature-major) into one per node; earlier
// features win exact gain ties.
std::vector<SplitCandidate> ReduceCandidates(std::span<const SplitCandidate> per_feature,
                                             size_t num_features, size_t num_nodes);

}  // namespace fairaudit::kernels::internal

#endif  // FAIRAUDIT_KERNELS_INTERNAL_H_
