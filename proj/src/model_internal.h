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

#ifndef FAIRAUDIT_MODEL_INTERNAL_H_
#define FAIRAUDIT_MODEL_INTERNAL_H_

#include <cstdint>
#include <span>

#include "fairaudit/matrix.h"

namespace fairaudit::internal {

// Shapes agree, features are finite, weights are valid and both classes
// carry positive weight. Throws kLengthMismatch / kBadValue /
// kDegenerateLabels.
void CheckTrainingInputs(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w);

}  // namespace fairaudit::internal

#endif  // FAIRAUDIT_MODEL_INTERNAL_H_
