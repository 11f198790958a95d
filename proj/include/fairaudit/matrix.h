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

#ifndef FAIRAUDIT_MATRIX_H_
#define FAIRAUDIT_MATRIX_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fairaudit {

// Dense row-major feature matrix with named columns.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;
  std::vector<std::string> names;

  Matrix() = default;
  Matrix(size_t r, size_t c, std::vector<std::string> column_names = {})
      : rows(r), cols(c), data(r * c, 0.0), names(std::move(column_names)) {}

  double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }

  std::span<const double> Row(size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::span<double> Row(size_t r) { return {data.data() + r * cols, cols}; }

  Matrix SelectRows(std::span<const size_t> row_ids) const;
};

template <typename T>
std::vector<T> Gather(std::span<const T> values, std::span<const size_t> ids) {
  std::vector<T> out;
  out.reserve(ids.size());
  for (size_t i : ids) out.push_back(values[i]);
  return out;
}

template <typename T>
std::vector<T> Gather(const std::vector<T>& values, std::span<const size_t> ids) {
  return Gather(std::span<const T>(values), ids);
}

}  // namespace fairaudit

#endif  // FAIRAUDIT_MATRIX_H_
