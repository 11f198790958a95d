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

#ifndef FAIRAUDIT_COHORT_H_
#define FAIRAUDIT_COHORT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/matrix.h"
#include "json.hpp"

namespace fairaudit {

enum class ColumnKind { kNumeric, kCategorical, kOrdinal };
enum class ColumnRole { kFeature, kProtected, kOutcome, kIdentifier };

// Level appended to categorical columns that contain empty cells.
inline constexpr std::string_view kMissingLevel = "Missing";

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  ColumnRole role = ColumnRole::kFeature;
  std::vector<std::string> levels;

  bool operator==(const ColumnSpec&) const = default;
};

using Schema = std::vector<ColumnSpec>;

// Throws kSchemaInvalid / kDuplicateColumn.
void ValidateSchema(const Schema& schema);

// Schema files are a JSON array of {"name", "kind", "role", "levels"} objects.
Schema SchemaFromJson(const nlohmann::json& doc);
nlohmann::json SchemaToJson(const Schema& schema);
Schema LoadSchemaFile(const std::filesystem::path& path);

// Immutable tabular dataset. Column storage is parallel to the schema:
// numeric cells hold the value (NaN when missing), categorical and ordinal
// cells hold the 0-based level index (ordinal NaN when missing), outcome
// cells hold 0/1 and identifier columns keep their raw text.
class Cohort {
 public:
  Cohort(Schema schema, std::vector<std::vector<double>> values,
         std::vector<std::vector<std::string>> text,
         std::vector<double> weights = {});

  size_t num_rows() const { return outcome_.size(); }
  const Schema& schema() const { return schema_; }
  size_t outcome_column() const { return outcome_column_; }

  std::span<const double> values(size_t column) const { return values_[column]; }
  std::span<const std::string> text(size_t column) const { return text_[column]; }
  const std::vector<uint8_t>& outcome() const { return outcome_; }
  const std::vector<double>& weights() const { return weights_; }

  std::optional<size_t> FindColumn(std::string_view name) const;
  // Throws kMissingColumn.
  size_t ColumnIndex(std::string_view name) const;

  std::vector<std::string> ProtectedNames() const;
  // Sorted row ids per level of a protected column; throws kMissingColumn.
  const std::vector<std::vector<size_t>>& GroupIndex(std::string_view name) const;
  // Level index per row for a protected column.
  std::vector<int> GroupLabels(std::string_view name) const;

  Cohort Subset(std::span<const size_t> rows) const;
  Cohort WithWeights(std::vector<double> weights) const;
  Cohort WithColumn(size_t column, std::vector<double> values) const;
  Cohort WithOutcome(std::vector<uint8_t> outcome) const;
  Cohort DropColumn(std::string_view name) const;

 private:
  void Validate();
  void BuildGroupIndex();

  Schema schema_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<std::string>> text_;
  std::vector<uint8_t> outcome_;
  std::vector<double> weights_;
  size_t outcome_column_ = 0;
  std::map<std::string, std::vector<std::vector<size_t>>, std::less<>> group_index_;
};

Cohort LoadCsv(const std::filesystem::path& path, const Schema& schema);
Cohort ParseCsv(std::string_view content, const Schema& schema);
void WriteCsv(const Cohort& cohort, const std::filesystem::path& path);
std::string FormatCsv(const Cohort& cohort);

// One-hot for categorical (full encoding, all levels), rank for ordinal,
// identity for numeric. Outcome and identifier columns are excluded.
Matrix EncodeFeatures(const Cohort& cohort);

// Per-column medians learned on training rows; fills NaN cells.
struct MedianImputer {
  std::vector<double> medians;

  static MedianImputer Fit(const Matrix& x, std::span<const size_t> rows);
  void Apply(Matrix& x) const;
};

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;
  uint64_t seed = 0;

  std::vector<size_t> TestRows(int fold) const;
  std::vector<size_t> TrainRows(int fold) const;
};

// Inner plan over the outer-training rows of one outer fold. Inner
// assignments index positions within `rows`, not cohort rows.
struct InnerPlan {
  std::vector<size_t> rows;
  FoldPlan plan;
};

struct NestedPlan {
  FoldPlan outer;
  std::vector<InnerPlan> inner;
};

FoldPlan StratifiedKFold(std::span<const uint8_t> labels, int k, uint64_t seed);
FoldPlan StratifiedKFold(const Cohort& cohort, int k, uint64_t seed);
NestedPlan NestedFolds(const Cohort& cohort, int k_outer, int k_inner, uint64_t seed);

}  // namespace fairaudit

#endif  // FAIRAUDIT_COHORT_H_
