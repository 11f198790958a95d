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

#include "fairaudit/cohort.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "fairaudit/error.h"
#include "fairaudit/rng.h"

namespace fairaudit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view KindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kOrdinal: return "ordinal";
  }
  return "numeric";
}

std::string_view RoleName(ColumnRole role) {
  switch (role) {
    case ColumnRole::kFeature: return "feature";
    case ColumnRole::kProtected: return "protected";
    case ColumnRole::kOutcome: return "outcome";
    case ColumnRole::kIdentifier: return "identifier";
  }
  return "feature";
}

ColumnKind ParseKind(const std::string& s) {
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "ordinal") return ColumnKind::kOrdinal;
  throw Error(ErrorCode::kSchemaInvalid, "unknown column kind '" + s + "'");
}

ColumnRole ParseRole(const std::string& s) {
  if (s == "feature") return ColumnRole::kFeature;
  if (s == "protected") return ColumnRole::kProtected;
  if (s == "outcome") return ColumnRole::kOutcome;
  if (s == "identifier") return ColumnRole::kIdentifier;
  throw Error(ErrorCode::kSchemaInvalid, "unknown column role '" + s + "'");
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> ParseDouble(std::string_view token) {
  token = Trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<std::vector<std::string>> ParseRecords(std::string_view content) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t i = 0;
  if (content.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  for (; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kBadValue, "unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

std::string QuoteCsv(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void ValidateSchema(const Schema& schema) {
  std::set<std::string_view> names;
  size_t outcomes = 0;
  for (const ColumnSpec& col : schema) {
    if (col.name.empty()) throw Error(ErrorCode::kSchemaInvalid, "empty column name");
    if (!names.insert(col.name).second) throw Error(ErrorCode::kDuplicateColumn, col.name);
    if (col.role == ColumnRole::kOutcome) {
      ++outcomes;
      continue;
    }
    if (col.role == ColumnRole::kIdentifier) continue;
    if (col.kind == ColumnKind::kNumeric && !col.levels.empty()) {
      throw Error(ErrorCode::kSchemaInvalid, "numeric column '" + col.name + "' declares levels");
    }
    if (col.kind != ColumnKind::kNumeric && col.levels.empty()) {
      throw Error(ErrorCode::kSchemaInvalid, "column '" + col.name + "' declares no levels");
    }
    if (col.role == ColumnRole::kProtected &&
        (col.kind != ColumnKind::kCategorical || col.levels.size() < 2)) {
      throw Error(ErrorCode::kSchemaInvalid,
                  "protected column '" + col.name + "' must be categorical with >= 2 levels");
    }
    std::set<std::string_view> levels(col.levels.begin(), col.levels.end());
    if (levels.size() != col.levels.size()) {
      throw Error(ErrorCode::kSchemaInvalid, "column '" + col.name + "' repeats a level");
    }
  }
  if (outcomes != 1) {
    throw Error(ErrorCode::kSchemaInvalid, "schema must have exactly one outcome column");
  }
}

Schema SchemaFromJson(const nlohmann::json& doc) {
  if (doc.is_object() && !doc.contains("columns")) {
    throw Error(ErrorCode::kSchemaInvalid, "schema object lacks 'columns'");
  }
  const nlohmann::json& columns = doc.is_object() ? doc.at("columns") : doc;
  if (!columns.is_array()) throw Error(ErrorCode::kSchemaInvalid, "schema must be an array");
  Schema schema;
  for (const auto& item : columns) {
    ColumnSpec col;
    try {
      col.name = item.at("name").get<std::string>();
      col.kind = ParseKind(item.value("kind", std::string("numeric")));
      col.role = ParseRole(item.value("role", std::string("feature")));
      if (item.contains("levels")) col.levels = item.at("levels").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kSchemaInvalid, e.what());
    }
    schema.push_back(std::move(col));
  }
  ValidateSchema(schema);
  return schema;
}

nlohmann::json SchemaToJson(const Schema& schema) {
  nlohmann::json columns = nlohmann::json::array();
  for (const ColumnSpec& col : schema) {
    nlohmann::json item = {{"name", col.name},
                           {"kind", std::string(KindName(col.kind))},
                           {"role", std::string(RoleName(col.role))}};
    if (!col.levels.empty()) item["levels"] = col.levels;
    columns.push_back(std::move(item));
  }
  return {{"columns", columns}};
}

Schema LoadSchemaFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open schema file " + path.string());
  try {
    return SchemaFromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchemaInvalid, e.what());
  }
}

Cohort::Cohort(Schema schema, std::vector<std::vector<double>> values,
               std::vector<std::vector<std::string>> text, std::vector<double> weights)
    : schema_(std::move(schema)), values_(std::move(values)), text_(std::move(text)),
      weights_(std::move(weights)) {
  Validate();
  BuildGroupIndex();
}

void Cohort::Validate() {
  ValidateSchema(schema_);
  const size_t cols = schema_.size();
  if (values_.size() != cols) values_.resize(cols);
  if (text_.size() != cols) text_.resize(cols);
  for (size_t c = 0; c < cols; ++c) {
    if (schema_[c].role == ColumnRole::kOutcome) outcome_column_ = c;
  }
  const size_t n = values_[outcome_column_].size();
  if (n == 0) throw Error(ErrorCode::kEmptyFile, "cohort has no rows");
  outcome_.assign(n, 0);
  for (size_t c = 0; c < cols; ++c) {
    const ColumnSpec& spec = schema_[c];
    if (spec.role == ColumnRole::kIdentifier) {
      if (text_[c].size() != n) text_[c].resize(n);
      values_[c].clear();
      continue;
    }
    if (values_[c].size() != n) {
      throw Error(ErrorCode::kLengthMismatch, "column '" + spec.name + "' has wrong length");
    }
    for (size_t r = 0; r < n; ++r) {
      const double v = values_[c][r];
      const std::string where = "column '" + spec.name + "' row " + std::to_string(r + 1);
      if (spec.role == ColumnRole::kOutcome) {
        if (v != 0.0 && v != 1.0) throw Error(ErrorCode::kBadValue, where + ": outcome not in {0,1}");
        outcome_[r] = static_cast<uint8_t>(v);
        continue;
      }
      if (std::isnan(v)) {
        if (spec.kind == ColumnKind::kCategorical) {
          throw Error(ErrorCode::kBadValue, where + ": categorical value missing");
        }
        continue;
      }
      if (!std::isfinite(v)) throw Error(ErrorCode::kBadValue, where + ": non-finite value");
      if (spec.kind != ColumnKind::kNumeric) {
        if (v < 0 || v >= static_cast<double>(spec.levels.size()) || v != std::floor(v)) {
          throw Error(ErrorCode::kBadValue, where + ": level index out of range");
        }
      }
    }
  }
  if (weights_.empty()) weights_.assign(n, 1.0);
  if (weights_.size() != n) throw Error(ErrorCode::kLengthMismatch, "weights length != rows");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw Error(ErrorCode::kBadValue, "weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kBadValue, "weights sum to zero");
}

void Cohort::BuildGroupIndex() {
  group_index_.clear();
  for (size_t c = 0; c < schema_.size(); ++c) {
    const ColumnSpec& spec = schema_[c];
    if (spec.role != ColumnRole::kProtected) continue;
    std::vector<std::vector<size_t>> groups(spec.levels.size());
    for (size_t r = 0; r < num_rows(); ++r) {
      groups[static_cast<size_t>(values_[c][r])].push_back(r);
    }
    group_index_.emplace(spec.name, std::move(groups));
  }
}

std::optional<size_t> Cohort::FindColumn(std::string_view name) const {
  for (size_t c = 0; c < schema_.size(); ++c) {
    if (schema_[c].name == name) return c;
  }
  return std::nullopt;
}

size_t Cohort::ColumnIndex(std::string_view name) const {
  if (auto c = FindColumn(name)) return *c;
  throw Error(ErrorCode::kMissingColumn, std::string(name));
}

std::vector<std::string> Cohort::ProtectedNames() const {
  std::vector<std::string> names;
  for (const auto& [name, groups] : group_index_) names.push_back(name);
  return names;
}

const std::vector<std::vector<size_t>>& Cohort::GroupIndex(std::string_view name) const {
  auto it = group_index_.find(name);
  if (it == group_index_.end()) {
    throw Error(ErrorCode::kMissingColumn, "no protected column '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<int> Cohort::GroupLabels(std::string_view name) const {
  const size_t c = ColumnIndex(name);
  if (schema_[c].kind != ColumnKind::kCategorical || schema_[c].role == ColumnRole::kOutcome) {
    throw Error(ErrorCode::kSchemaInvalid, "column '" + std::string(name) + "' is not categorical");
  }
  std::vector<int> labels(num_rows());
  for (size_t r = 0; r < num_rows(); ++r) labels[r] = static_cast<int>(values_[c][r]);
  return labels;
}

Cohort Cohort::Subset(std::span<const size_t> rows) const {
  std::vector<std::vector<double>> values(schema_.size());
  std::vector<std::vector<std::string>> text(schema_.size());
  for (size_t c = 0; c < schema_.size(); ++c) {
    if (!values_[c].empty()) values[c] = Gather(values_[c], rows);
    if (!text_[c].empty()) text[c] = Gather(text_[c], rows);
  }
  return Cohort(schema_, std::move(values), std::move(text), Gather(weights_, rows));
}

Cohort Cohort::WithWeights(std::vector<double> weights) const {
  return Cohort(schema_, values_, text_, std::move(weights));
}

Cohort Cohort::WithColumn(size_t column, std::vector<double> values) const {
  auto all = values_;
  all.at(column) = std::move(values);
  return Cohort(schema_, std::move(all), text_, weights_);
}

Cohort Cohort::WithOutcome(std::vector<uint8_t> outcome) const {
  return WithColumn(outcome_column_, std::vector<double>(outcome.begin(), outcome.end()));
}

Cohort Cohort::DropColumn(std::string_view name) const {
  const size_t c = ColumnIndex(name);
  if (schema_[c].role == ColumnRole::kOutcome) {
    throw Error(ErrorCode::kCannotDropOutcome, std::string(name));
  }
  Schema schema = schema_;
  auto values = values_;
  auto text = text_;
  schema.erase(schema.begin() + static_cast<std::ptrdiff_t>(c));
  values.erase(values.begin() + static_cast<std::ptrdiff_t>(c));
  text.erase(text.begin() + static_cast<std::ptrdiff_t>(c));
  return Cohort(std::move(schema), std::move(values), std::move(text), weights_);
}

Cohort ParseCsv(std::string_view content, const Schema& declared) {
  ValidateSchema(declared);
  auto records = ParseRecords(content);
  if (records.empty()) throw Error(ErrorCode::kEmptyFile, "no header row");
  const auto& header = records.front();
  std::map<std::string, size_t, std::less<>> position;
  for (size_t i = 0; i < header.size(); ++i) {
    std::string name(Trim(header[i]));
    if (!position.emplace(name, i).second) throw Error(ErrorCode::kDuplicateColumn, name);
  }
  for (const ColumnSpec& col : declared) {
    if (!position.contains(col.name)) throw Error(ErrorCode::kMissingColumn, col.name);
  }
  if (position.size() != declared.size()) {
    for (const auto& [name, idx] : position) {
      bool known = std::any_of(declared.begin(), declared.end(),
                               [&](const ColumnSpec& c) { return c.name == name; });
      if (!known) throw Error(ErrorCode::kSchemaInvalid, "column '" + name + "' is not in the schema");
    }
  }
  const size_t n = records.size() - 1;
  if (n == 0) throw Error(ErrorCode::kEmptyFile, "no data rows");

  Schema schema = declared;
  std::vector<std::vector<double>> values(schema.size());
  std::vector<std::vector<std::string>> text(schema.size());
  for (size_t c = 0; c < schema.size(); ++c) {
    ColumnSpec& spec = schema[c];
    const size_t src = position.at(spec.name);
    if (spec.role == ColumnRole::kIdentifier) text[c].reserve(n);
    else values[c].reserve(n);
    for (size_t r = 0; r < n; ++r) {
      const auto& record = records[r + 1];
      if (record.size() != header.size()) {
        throw Error(ErrorCode::kBadValue, "row " + std::to_string(r + 1) + ": expected " +
                                              std::to_string(header.size()) + " fields, got " +
                                              std::to_string(record.size()));
      }
      std::string_view token = Trim(record[src]);
      const std::string where = "row " + std::to_string(r + 1) + " column '" + spec.name + "'";
      if (spec.role == ColumnRole::kIdentifier) {
        text[c].emplace_back(token);
        continue;
      }
      if (spec.role == ColumnRole::kOutcome) {
        auto v = ParseDouble(token);
        if (!v || (*v != 0.0 && *v != 1.0)) {
          throw Error(ErrorCode::kBadValue, where + ": outcome '" + std::string(token) + "' not in {0,1}");
        }
        values[c].push_back(*v);
        continue;
      }
      if (spec.kind == ColumnKind::kNumeric) {
        if (token.empty()) {
          values[c].push_back(kNaN);
          continue;
        }
        auto v = ParseDouble(token);
        if (!v) throw Error(ErrorCode::kBadValue, where + ": '" + std::string(token) + "' is not numeric");
        values[c].push_back(*v);
        continue;
      }
      if (token.empty() && spec.kind == ColumnKind::kOrdinal) {
        values[c].push_back(kNaN);
        continue;
      }
      std::string_view level = token.empty() ? kMissingLevel : token;
      auto it = std::find(spec.levels.begin(), spec.levels.end(), level);
      if (it == spec.levels.end()) {
        if (level != kMissingLevel || spec.kind != ColumnKind::kCategorical) {
          throw Error(ErrorCode::kBadValue, where + ": level '" + std::string(token) + "' not declared");
        }
        spec.levels.emplace_back(kMissingLevel);
        it = spec.levels.end() - 1;
      }
      values[c].push_back(static_cast<double>(it - spec.levels.begin()));
    }
  }
  return Cohort(std::move(schema), std::move(values), std::move(text));
}

Cohort LoadCsv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), schema);
}

std::string FormatCsv(const Cohort& cohort) {
  const Schema& schema = cohort.schema();
  std::string out;
  for (size_t c = 0; c < schema.size(); ++c) {
    if (c) out.push_back(',');
    out += QuoteCsv(schema[c].name);
  }
  out += "\r\n";
  for (size_t r = 0; r < cohort.num_rows(); ++r) {
    for (size_t c = 0; c < schema.size(); ++c) {
      if (c) out.push_back(',');
      const ColumnSpec& spec = schema[c];
      if (spec.role == ColumnRole::kIdentifier) {
        out += QuoteCsv(cohort.text(c)[r]);
        continue;
      }
      const double v = cohort.values(c)[r];
      if (spec.role == ColumnRole::kOutcome || spec.kind == ColumnKind::kNumeric || std::isnan(v)) {
        out += FormatNumber(v);
      } else {
        out += QuoteCsv(spec.levels[static_cast<size_t>(v)]);
      }
    }
    out += "\r\n";
  }
  return out;
}

void WriteCsv(const Cohort& cohort, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << FormatCsv(cohort);
}

Matrix EncodeFeatures(const Cohort& cohort) {
  const Schema& schema = cohort.schema();
  std::vector<std::string> names;
  struct Source {
    size_t column;
    int level;  // -1: copy value
  };
  std::vector<Source> sources;
  for (size_t c = 0; c < schema.size(); ++c) {
    const ColumnSpec& spec = schema[c];
    if (spec.role == ColumnRole::kOutcome || spec.role == ColumnRole::kIdentifier) continue;
    if (spec.kind == ColumnKind::kCategorical) {
      for (size_t l = 0; l < spec.levels.size(); ++l) {
        names.push_back(spec.name + "=" + spec.levels[l]);
        sources.push_back({c, static_cast<int>(l)});
      }
    } else {
      names.push_back(spec.name);
      sources.push_back({c, -1});
    }
  }
  Matrix x(cohort.num_rows(), sources.size(), std::move(names));
  for (size_t j = 0; j < sources.size(); ++j) {
    auto column = cohort.values(sources[j].column);
    for (size_t r = 0; r < x.rows; ++r) {
      x(r, j) = sources[j].level < 0 ? column[r] : (column[r] == sources[j].level ? 1.0 : 0.0);
    }
  }
  return x;
}

Matrix Matrix::SelectRows(std::span<const size_t> row_ids) const {
  Matrix out(row_ids.size(), cols, names);
  for (size_t i = 0; i < row_ids.size(); ++i) {
    auto src = Row(row_ids[i]);
    std::copy(src.begin(), src.end(), out.Row(i).begin());
  }
  return out;
}

MedianImputer MedianImputer::Fit(const Matrix& x, std::span<const size_t> rows) {
  MedianImputer imputer;
  imputer.medians.assign(x.cols, 0.0);
  std::vector<double> column;
  for (size_t j = 0; j < x.cols; ++j) {
    column.clear();
    for (size_t r : rows) {
      if (!std::isnan(x(r, j))) column.push_back(x(r, j));
    }
    if (column.empty()) continue;
    std::sort(column.begin(), column.end());
    const size_t m = column.size();
    imputer.medians[j] = m % 2 ? column[m / 2] : 0.5 * (column[m / 2 - 1] + column[m / 2]);
  }
  return imputer;
}

void MedianImputer::Apply(Matrix& x) const {
  for (size_t r = 0; r < x.rows; ++r) {
    for (size_t j = 0; j < x.cols; ++j) {
      if (std::isnan(x(r, j))) x(r, j) = medians[j];
    }
  }
}

std::vector<size_t> FoldPlan::TestRows(int fold) const {
  std::vector<size_t> rows;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<size_t> FoldPlan::TrainRows(int fold) const {
  std::vector<size_t> rows;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan StratifiedKFold(std::span<const uint8_t> labels, int k, uint64_t seed) {
  const size_t n = labels.size();
  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < n; ++i) (labels[i] ? pos : neg).push_back(i);
  if (k < 2 || static_cast<size_t>(k) > n) {
    throw Error(ErrorCode::kInfeasibleSplit, "k=" + std::to_string(k) + " with n=" + std::to_string(n));
  }
  if (pos.size() < static_cast<size_t>(k) || neg.size() < static_cast<size_t>(k)) {
    throw Error(ErrorCode::kInfeasibleSplit,
                "k=" + std::to_string(k) + " needs >= k samples per class (positives=" +
                    std::to_string(pos.size()) + ", negatives=" + std::to_string(neg.size()) + ")");
  }
  Rng rng(seed);
  rng.Shuffle(std::span<size_t>(pos));
  rng.Shuffle(std::span<size_t>(neg));
  FoldPlan plan{k, std::vector<int>(n, 0), seed};
  // Deal positives then negatives round-robin; negatives continue where the
  // positives stopped so fold sizes also differ by at most one.
  size_t slot = 0;
  for (size_t i : pos) plan.assignments[i] = static_cast<int>(slot++ % k);
  for (size_t i : neg) plan.assignments[i] = static_cast<int>(slot++ % k);
  return plan;
}

FoldPlan StratifiedKFold(const Cohort& cohort, int k, uint64_t seed) {
  return StratifiedKFold(std::span<const uint8_t>(cohort.outcome()), k, seed);
}

NestedPlan NestedFolds(const Cohort& cohort, int k_outer, int k_inner, uint64_t seed) {
  NestedPlan nested;
  nested.outer = StratifiedKFold(cohort, k_outer, seed);
  for (int f = 0; f < k_outer; ++f) {
    InnerPlan inner;
    inner.rows = nested.outer.TrainRows(f);
    std::vector<uint8_t> labels = Gather(cohort.outcome(), inner.rows);
    inner.plan = StratifiedKFold(labels, k_inner, SplitMix64(seed ^ static_cast<uint64_t>(f + 1)));
    nested.inner.push_back(std::move(inner));
  }
  return nested;
}

}  // namespace fairaudit
