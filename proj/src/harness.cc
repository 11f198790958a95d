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

#include "fairaudit/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include <omp.h>

#include "fairaudit/error.h"

namespace fairaudit {
namespace {

constexpr double kDecisionThreshold = 0.5;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<size_t> Iota(size_t n) {
  std::vector<size_t> v(n);
  std::iota(v.begin(), v.end(), size_t{0});
  return v;
}

std::string ModelKindName(ModelKind kind) { return kind == ModelKind::kGbt ? "gbt" : "logistic"; }

ModelKind ParseModelKind(const std::string& name) {
  if (name == "logistic" || name == "lr") return ModelKind::kLogistic;
  if (name == "gbt" || name == "gradient_boosting") return ModelKind::kGbt;
  throw Error(ErrorCode::kConfigInvalid, "unknown model kind '" + name + "'");
}

std::string MetricName(SelectionMetric metric) {
  return metric == SelectionMetric::kAuc ? "auc" : "bacc";
}

// Model fitted on one design matrix.
struct DesignFit {
  size_t selected = 0;
  MedianImputer imputer;
  TrainedModel model;
  std::vector<double> out_of_fold;
};

DesignFit FitDesign(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w,
                    const InnerPlan& inner, const ExperimentConfig& config,
                    bool keep_out_of_fold) {
  const std::vector<ModelConfig> grid = config.EffectiveGrid();
  DesignFit fit;
  GridSelection selection =
      SelectConfig(x, y, w, grid, inner, config.selection_metric, keep_out_of_fold);
  fit.selected = selection.best_index;
  fit.out_of_fold = std::move(selection.out_of_fold);
  fit.imputer = MedianImputer::Fit(x, inner.rows);
  Matrix x_train = x.SelectRows(inner.rows);
  fit.imputer.Apply(x_train);
  fit.model =
      Train(grid[fit.selected], x_train, Gather(y, inner.rows), Gather(w, inner.rows));
  return fit;
}

std::vector<int> LevelIds(const std::vector<std::string>& names, const ColumnSpec& column) {
  std::vector<int> ids;
  for (const std::string& name : names) {
    auto it = std::find(column.levels.begin(), column.levels.end(), name);
    if (it == column.levels.end()) {
      throw Error(ErrorCode::kConfigInvalid,
                  "unknown level '" + name + "' of '" + column.name + "'");
    }
    ids.push_back(static_cast<int>(it - column.levels.begin()));
  }
  return ids;
}

std::vector<uint8_t> AtThreshold(std::span<const double> p, double threshold) {
  std::vector<uint8_t> out(p.size());
  for (size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= threshold ? 1 : 0;
  return out;
}

// One cell's output on one test fold.
struct CellFold {
  std::string error;
  std::vector<double> scores;
  std::vector<uint8_t> predictions;
  size_t unknown_rows = 0;
  nlohmann::json policy;
};

std::vector<double> PredictDesign(const MethodFit& m, Matrix x) {
  m.imputer.Apply(x);
  return PredictProba(*m.model, x);
}

std::vector<CellFold> ScoreFold(const Cohort& cohort, const Matrix& encoded,
                                const NestedPlan& plan, const FoldFit& fit) {
  const std::vector<size_t> test = plan.outer.TestRows(fit.fold);
  const Cohort test_cohort = cohort.Subset(test);
  std::vector<double> base_scores;
  if (fit.base_model) {
    Matrix x_test = encoded.SelectRows(test);
    fit.imputer.Apply(x_test);
    base_scores = PredictProba(*fit.base_model, x_test);
  }
  std::vector<CellFold> out(fit.methods.size());
  for (size_t i = 0; i < fit.methods.size(); ++i) {
    const MethodFit& m = fit.methods[i];
    CellFold& cell = out[i];
    if (!m.error.empty()) {
      cell.error = m.error;
      continue;
    }
    try {
      if (m.method == kBaseMethod) {
        cell.scores = base_scores;
        cell.predictions = AtThreshold(base_scores, kDecisionThreshold);
        continue;
      }
      const std::vector<int> groups = test_cohort.GroupLabels(m.attribute);
      const auto& levels = cohort.schema()[cohort.ColumnIndex(m.attribute)].levels;
      switch (ParseMethod(m.method)) {
        case MitigationMethod::kSup:
          cell.scores = PredictDesign(m, EncodeFeatures(test_cohort.DropColumn(m.attribute)));
          cell.predictions = AtThreshold(cell.scores, kDecisionThreshold);
          break;
        case MitigationMethod::kRw:
          cell.scores = PredictDesign(m, encoded.SelectRows(test));
          cell.predictions = AtThreshold(cell.scores, kDecisionThreshold);
          break;
        case MitigationMethod::kDir:
          cell.scores = PredictDesign(m, EncodeFeatures(m.repairer->Apply(test_cohort)));
          cell.predictions = AtThreshold(cell.scores, kDecisionThreshold);
          break;
        case MitigationMethod::kPsta: {
          ThresholdApplication applied = ApplyThresholds(base_scores, groups, *m.thresholds);
          cell.scores = base_scores;
          cell.predictions = std::move(applied.predictions);
          cell.unknown_rows = applied.unknown_group_rows;
          cell.policy = ThresholdPolicyToJson(*m.thresholds, levels);
          break;
        }
        case MitigationMethod::kCpp:
          cell.scores = CppApply(*m.cpp, base_scores, groups, &cell.unknown_rows);
          cell.predictions = AtThreshold(cell.scores, kDecisionThreshold);
          cell.policy = CppPolicyToJson(*m.cpp, levels);
          break;
      }
    } catch (const Error& e) {
      cell.error = e.what();
    }
  }
  return out;
}

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};

MeanCi FoldCi(std::span<const double> values, double alpha) {
  const double k = static_cast<double>(values.size());
  MeanCi ci;
  for (double v : values) ci.mean += v;
  ci.mean /= k;
  if (values.size() < 2) {
    ci.half_width = kNaN;
    return ci;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
  const double sd = std::sqrt(ss / (k - 1.0));
  ci.half_width = StudentTQuantile(1.0 - alpha / 2.0, k - 1.0) * sd / std::sqrt(k);
  return ci;
}

double RateOrNaN(double num, double den) { return den > 0.0 ? num / den : kNaN; }

// Aggregates per-fold outputs of one cell over all outer folds.
void Aggregate(const Cohort& cohort, const NestedPlan& plan,
               const std::vector<const CellFold*>& folds, const ExperimentConfig& config,
               CellReport& cell) {
  const size_t n = cohort.num_rows();
  const int k = plan.outer.k;
  const auto& y = cohort.outcome();
  const std::vector<int> groups = cohort.GroupLabels(cell.attribute);
  const auto& levels = cohort.schema()[cohort.ColumnIndex(cell.attribute)].levels;
  GroupReport& report = cell.report;
  report.attribute = cell.attribute;
  report.groups.assign(levels.size(), GroupStats{});
  for (size_t g = 0; g < levels.size(); ++g) report.groups[g].level = levels[g];
  cell.row_scores.assign(n, kNaN);
  cell.row_predictions.assign(n, 0);
  for (int f = 0; f < k; ++f) {
    const CellFold& fold = *folds[f];
    const std::vector<size_t> test = plan.outer.TestRows(f);
    const auto y_test = Gather(std::span<const uint8_t>(y), test);
    std::vector<ConfusionCounts> by_group(levels.size());
    ConfusionCounts all;
    for (size_t i = 0; i < test.size(); ++i) {
      cell.row_scores[test[i]] = fold.scores[i];
      cell.row_predictions[test[i]] = fold.predictions[i];
      ConfusionCounts& c = by_group[static_cast<size_t>(groups[test[i]])];
      const bool pred = fold.predictions[i] != 0;
      if (y_test[i]) {
        (pred ? c.tp : c.fn) += 1.0;
        (pred ? all.tp : all.fn) += 1.0;
      } else {
        (pred ? c.fp : c.tn) += 1.0;
        (pred ? all.fp : all.tn) += 1.0;
      }
    }
    report.pooled += all;
    report.fold_bacc.push_back(BalancedAccuracy(all));
    report.fold_auc.push_back(AucRoc(fold.scores, y_test));
    for (size_t g = 0; g < levels.size(); ++g) {
      GroupStats& stats = report.groups[g];
      stats.pooled += by_group[g];
      const double positives = by_group[g].tp + by_group[g].fn;
      if (positives > 0.0) {
        stats.fold_tprs.push_back(by_group[g].tp / positives);
      } else {
        stats.included = false;
      }
    }
    cell.unknown_group_rows += fold.unknown_rows;
    if (!fold.policy.is_null()) cell.fold_policies.push_back(fold.policy);
  }
  const MeanCi bacc = FoldCi(report.fold_bacc, config.alpha);
  const MeanCi auc = FoldCi(report.fold_auc, config.alpha);
  report.bacc_mean = bacc.mean;
  report.bacc_half_width = bacc.half_width;
  report.auc_mean = auc.mean;
  report.auc_half_width = auc.half_width;
  report.sensitivity = RateOrNaN(report.pooled.tp, report.pooled.tp + report.pooled.fn);
  report.specificity = RateOrNaN(report.pooled.tn, report.pooled.tn + report.pooled.fp);
  report.pooled_bacc = (report.sensitivity + report.specificity) / 2.0;

  std::vector<size_t> included;
  std::vector<std::vector<double>> tprs;
  for (size_t g = 0; g < report.groups.size(); ++g) {
    GroupStats& stats = report.groups[g];
    const ConfusionCounts& c = stats.pooled;
    stats.pooled_tpr = RateOrNaN(c.tp, c.tp + c.fn);
    stats.pooled_fpr = RateOrNaN(c.fp, c.fp + c.tn);
    stats.mean_tpr = stats.fold_tprs.empty()
                         ? kNaN
                         : std::accumulate(stats.fold_tprs.begin(), stats.fold_tprs.end(), 0.0) /
                               static_cast<double>(stats.fold_tprs.size());
    stats.half_width = kNaN;
    if (stats.included) {
      included.push_back(g);
      tprs.push_back(stats.fold_tprs);
    }
  }
  report.significant.assign(report.groups.size(), std::vector<bool>(report.groups.size(), false));
  if (included.size() < 2) {
    throw Error(ErrorCode::kNoPositivesInGroup,
                "fewer than two groups of '" + cell.attribute +
                    "' have positives in every test fold");
  }
  const TukeyResult tukey = TukeyTprTest(tprs, config.alpha);
  report.q_critical = tukey.q_critical;
  report.ms_within = tukey.ms_within;
  for (size_t a = 0; a < included.size(); ++a) {
    report.groups[included[a]].half_width = tukey.half_widths[a];
    for (size_t b = 0; b < included.size(); ++b) {
      report.significant[included[a]][included[b]] = tukey.significant[a][b];
    }
  }
}

void Summarize(const ExperimentConfig& config, const std::string& privileged,
               const std::string& unprivileged, CellReport& cell) {
  FairnessSummary& s = cell.fairness;
  s.privileged = privileged;
  s.unprivileged = unprivileged;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double tpr_priv = kNaN, tpr_unpriv = kNaN;
  for (const GroupStats& g : cell.report.groups) {
    if (!g.included) continue;
    lo = std::min(lo, g.mean_tpr);
    hi = std::max(hi, g.mean_tpr);
    if (g.level == privileged) tpr_priv = g.mean_tpr;
    if (g.level == unprivileged) tpr_unpriv = g.mean_tpr;
  }
  if (std::isnan(tpr_priv) || std::isnan(tpr_unpriv)) {
    throw Error(ErrorCode::kNoPositivesInGroup,
                "privileged or unprivileged group of '" + cell.attribute +
                    "' lacks positives in some test fold");
  }
  s.eod = Eod(tpr_unpriv, tpr_priv);
  s.gamma = hi - lo;
  s.fair = std::abs(s.eod) <= config.fairness_band;
}

// Privileged / unprivileged levels from the base cell.
std::pair<std::string, std::string> ReferenceGroups(const ExperimentConfig& config,
                                                    const CellReport& base) {
  const GroupStats* best = nullptr;
  const GroupStats* worst = nullptr;
  auto it = config.privileged.find(base.attribute);
  for (const GroupStats& g : base.report.groups) {
    if (!g.included) continue;
    if (it != config.privileged.end()) {
      if (g.level == it->second) best = &g;
    } else if (best == nullptr || g.mean_tpr > best->mean_tpr) {
      best = &g;
    }
  }
  if (best == nullptr) {
    throw Error(ErrorCode::kUnknownGroup,
                "privileged level '" + it->second + "' of '" + base.attribute +
                    "' is absent or lacks positives");
  }
  for (const GroupStats& g : base.report.groups) {
    if (!g.included || &g == best) continue;
    if (worst == nullptr || g.mean_tpr < worst->mean_tpr) worst = &g;
  }
  return {best->level, worst->level};
}

std::string Timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

constexpr const char* kBestMethodRule =
    "minimum |EOD| among mitigations whose balanced-accuracy drop versus base is at most "
    "the tolerance; otherwise minimum |EOD| outright";

}  // namespace

// --- Config ----------------------------------------------------------------

void ExperimentConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfigInvalid, msg); };
  if (!data.synthetic && (data.csv.empty() || data.schema.empty())) {
    fail("data source needs a CSV and a schema, or a synthetic cohort spec");
  }
  if (data.synthetic) data.synthetic->Validate();
  if (k_outer < 2) fail("k_outer must be at least 2");
  if (k_inner < 2) fail("k_inner must be at least 2");
  if (protected_attributes.empty()) fail("at least one protected attribute is required");
  std::set<std::string> seen;
  for (const std::string& a : protected_attributes) {
    if (!seen.insert(a).second) fail("protected attribute '" + a + "' listed twice");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0, 1)");
  if (!(fairness_band > 0.0 && fairness_band < 1.0)) fail("fairness band must be in (0, 1)");
  if (!(bacc_tolerance >= 0.0)) fail("bacc tolerance must be non-negative");
  for (const ModelConfig& m : grid) {
    const bool gbt = std::holds_alternative<GbtConfig>(m);
    if (gbt != (model_kind == ModelKind::kGbt)) fail("grid entry does not match the model kind");
    std::visit([](const auto& c) { c.Validate(); }, m);
  }
  std::set<std::pair<std::string, int>> cells;
  for (const MitigationSpec& spec : mitigations) {
    MitigationSpec probe = spec;
    if (probe.protected_attribute.empty()) probe.protected_attribute = protected_attributes.front();
    probe.Validate();
    if (!spec.protected_attribute.empty() && !seen.count(spec.protected_attribute)) {
      fail("mitigation targets unaudited attribute '" + spec.protected_attribute + "'");
    }
    for (const std::string& a : protected_attributes) {
      if (!spec.protected_attribute.empty() && spec.protected_attribute != a) continue;
      if (!cells.insert({a, static_cast<int>(spec.method)}).second) {
        fail("method " + std::string(MethodName(spec.method)) + " listed twice for '" + a + "'");
      }
    }
  }
  for (const auto& [attribute, level] : privileged) {
    if (!seen.count(attribute)) fail("privileged level given for unaudited '" + attribute + "'");
  }
}

std::vector<ModelConfig> ExperimentConfig::EffectiveGrid() const {
  if (!grid.empty()) return grid;
  return model_kind == ModelKind::kGbt ? DefaultGbtGrid() : DefaultLogisticGrid();
}

std::vector<MitigationSpec> ExperimentConfig::MitigationsFor(const std::string& attribute) const {
  std::vector<MitigationSpec> out;
  for (const MitigationSpec& spec : mitigations) {
    if (!spec.protected_attribute.empty() && spec.protected_attribute != attribute) continue;
    MitigationSpec copy = spec;
    copy.protected_attribute = attribute;
    out.push_back(std::move(copy));
  }
  return out;
}

namespace {

template <typename T>
T Field(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kConfigInvalid, std::string("config key '") + key + "' has the wrong type");
  }
}

void CheckKeys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
               const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::kConfigInvalid, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(ErrorCode::kConfigInvalid, "unknown key '" + key + "' in " + where);
  }
}

MitigationSpec SpecFromJson(const nlohmann::json& doc) {
  CheckKeys(doc,
            {"method", "protected_attribute", "repair_level", "grid_step", "default_threshold",
             "unprivileged", "seed"},
            "mitigation");
  MitigationSpec spec;
  try {
    spec.method = ParseMethod(Field<std::string>(doc, "method", ""));
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
  spec.protected_attribute = Field<std::string>(doc, "protected_attribute", "");
  spec.repair_level = Field<double>(doc, "repair_level", spec.repair_level);
  spec.grid_step = Field<double>(doc, "grid_step", spec.grid_step);
  spec.default_threshold = Field<double>(doc, "default_threshold", spec.default_threshold);
  spec.unprivileged = Field<std::vector<std::string>>(doc, "unprivileged", {});
  spec.seed = Field<uint64_t>(doc, "seed", spec.seed);
  return spec;
}

nlohmann::json SpecToJson(const MitigationSpec& spec) {
  nlohmann::json doc = {{"method", MethodName(spec.method)}};
  if (!spec.protected_attribute.empty()) doc["protected_attribute"] = spec.protected_attribute;
  switch (spec.method) {
    case MitigationMethod::kDir:
      doc["repair_level"] = spec.repair_level;
      break;
    case MitigationMethod::kPsta:
      doc["grid_step"] = spec.grid_step;
      doc["default_threshold"] = spec.default_threshold;
      doc["unprivileged"] = spec.unprivileged;
      break;
    case MitigationMethod::kCpp:
      doc["seed"] = spec.seed;
      break;
    default:
      break;
  }
  return doc;
}

}  // namespace

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& doc,
                                          const std::filesystem::path& base_dir) {
  CheckKeys(doc,
            {"data", "model", "cv", "protected", "privileged", "mitigations", "output_dir", "alpha",
             "fairness_band", "bacc_tolerance", "post_processing_fit"},
            "config");
  ExperimentConfig config;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (!doc.contains("data")) throw Error(ErrorCode::kConfigInvalid, "config lacks 'data'");
  const nlohmann::json& data = doc.at("data");
  CheckKeys(data, {"csv", "schema", "synthetic"}, "data");
  if (data.contains("synthetic")) {
    try {
      config.data.synthetic = CohortSpecFromJson(data.at("synthetic"));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigInvalid, e.what());
    }
  } else {
    config.data.csv = resolve(Field<std::string>(data, "csv", ""));
    config.data.schema = resolve(Field<std::string>(data, "schema", ""));
  }
  if (doc.contains("model")) {
    const nlohmann::json& model = doc.at("model");
    CheckKeys(model, {"kind", "grid", "selection_metric"}, "model");
    config.model_kind = ParseModelKind(Field<std::string>(model, "kind", "logistic"));
    if (model.contains("grid")) {
      for (const nlohmann::json& entry : model.at("grid")) {
        nlohmann::json tagged = entry;
        if (!tagged.contains("kind")) tagged["kind"] = ModelKindName(config.model_kind);
        try {
          config.grid.push_back(ConfigFromJson(tagged));
        } catch (const Error& e) {
          throw Error(ErrorCode::kConfigInvalid, e.what());
        }
      }
    }
    const std::string metric = Field<std::string>(model, "selection_metric", "bacc");
    if (metric == "auc") {
      config.selection_metric = SelectionMetric::kAuc;
    } else if (metric != "bacc") {
      throw Error(ErrorCode::kConfigInvalid, "selection_metric must be 'bacc' or 'auc'");
    }
  }
  if (doc.contains("cv")) {
    const nlohmann::json& cv = doc.at("cv");
    CheckKeys(cv, {"k_outer", "k_inner", "seed"}, "cv");
    config.k_outer = Field<int>(cv, "k_outer", config.k_outer);
    config.k_inner = Field<int>(cv, "k_inner", config.k_inner);
    config.seed = Field<uint64_t>(cv, "seed", config.seed);
  }
  config.protected_attributes = Field<std::vector<std::string>>(doc, "protected", {});
  config.privileged = Field<std::map<std::string, std::string>>(doc, "privileged", {});
  if (doc.contains("mitigations")) {
    for (const nlohmann::json& m : doc.at("mitigations")) {
      config.mitigations.push_back(m.is_string() ? SpecFromJson({{"method", m}}) : SpecFromJson(m));
    }
  }
  if (doc.contains("output_dir")) config.output_dir = resolve(doc.at("output_dir").get<std::string>());
  config.alpha = Field<double>(doc, "alpha", config.alpha);
  config.fairness_band = Field<double>(doc, "fairness_band", config.fairness_band);
  config.bacc_tolerance = Field<double>(doc, "bacc_tolerance", config.bacc_tolerance);
  const std::string post = Field<std::string>(doc, "post_processing_fit", "out_of_fold");
  if (post == "in_sample") {
    config.post_fit = PostFitData::kInSample;
  } else if (post != "out_of_fold") {
    throw Error(ErrorCode::kConfigInvalid, "post_processing_fit must be 'out_of_fold' or 'in_sample'");
  }
  config.Validate();
  return config;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, "config '" + path.string() + "': " + e.what());
  }
  return ExperimentConfigFromJson(doc, path.parent_path());
}

// Echo of the experiment definition; the output directory is left out so
// that runs written to different places stay comparable.
nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config) {
  nlohmann::json data;
  if (config.data.synthetic) {
    data["synthetic"] = CohortSpecToJson(*config.data.synthetic);
  } else {
    data["csv"] = config.data.csv.string();
    data["schema"] = config.data.schema.string();
  }
  nlohmann::json grid = nlohmann::json::array();
  for (const ModelConfig& m : config.EffectiveGrid()) grid.push_back(ConfigToJson(m));
  nlohmann::json mitigations = nlohmann::json::array();
  for (const MitigationSpec& spec : config.mitigations) mitigations.push_back(SpecToJson(spec));
  return {
      {"data", data},
      {"model",
       {{"kind", ModelKindName(config.model_kind)},
        {"grid", grid},
        {"selection_metric", MetricName(config.selection_metric)}}},
      {"cv", {{"k_outer", config.k_outer}, {"k_inner", config.k_inner}, {"seed", config.seed}}},
      {"protected", config.protected_attributes},
      {"privileged", config.privileged},
      {"mitigations", mitigations},
      {"alpha", config.alpha},
      {"fairness_band", config.fairness_band},
      {"bacc_tolerance", config.bacc_tolerance},
      {"post_processing_fit",
       config.post_fit == PostFitData::kInSample ? "in_sample" : "out_of_fold"},
  };
}

Cohort LoadCohort(const ExperimentConfig& config) {
  if (config.data.synthetic) return GenerateCohort(*config.data.synthetic);
  return LoadCsv(config.data.csv, LoadSchemaFile(config.data.schema));
}

// --- Fold fitting ----------------------------------------------------------

nlohmann::json MethodFit::Fitted(std::span<const std::string> levels) const {
  nlohmann::json doc = {{"attribute", attribute}, {"method", method}, {"error", error}};
  if (!error.empty()) return doc;
  doc["selected_config"] = selected_config;
  if (model) doc["model"] = ModelToJson(*model);
  doc["imputer"] = imputer.medians;
  doc["training_weights"] = training_weights;
  if (repairer) {
    doc["repairer"] = repairer->ToJson();
    doc["training_features"] = training_features.data;
  }
  if (thresholds) doc["thresholds"] = ThresholdPolicyToJson(*thresholds, levels);
  if (cpp) doc["cpp"] = CppPolicyToJson(*cpp, levels);
  doc["warnings"] = warnings;
  return doc;
}

FoldFit FitFold(const Cohort& cohort, const NestedPlan& plan, int fold,
                const ExperimentConfig& config) {
  FoldFit fit;
  fit.fold = fold;
  const InnerPlan& inner = plan.inner.at(static_cast<size_t>(fold));
  const std::vector<size_t>& train = inner.rows;
  const Matrix encoded = EncodeFeatures(cohort);
  const auto& y = cohort.outcome();
  const auto& w = cohort.weights();
  const std::vector<uint8_t> y_train = Gather(std::span<const uint8_t>(y), train);
  const std::vector<double> w_train = Gather(std::span<const double>(w), train);

  MethodFit base;
  base.method = std::string(kBaseMethod);
  try {
    DesignFit d = FitDesign(encoded, y, w, inner, config, true);
    fit.base_config = d.selected;
    fit.base_model = d.model;
    fit.imputer = d.imputer;
    if (config.post_fit == PostFitData::kOutOfFold) {
      fit.post_fit_scores = std::move(d.out_of_fold);
    } else {
      Matrix x_train = encoded.SelectRows(train);
      d.imputer.Apply(x_train);
      fit.post_fit_scores = PredictProba(d.model, x_train);
    }
    base.selected_config = d.selected;
    base.model = std::move(d.model);
    base.imputer = std::move(d.imputer);
  } catch (const Error& e) {
    fit.base_error = e.what();
  }

  InnerPlan local{Iota(train.size()), inner.plan};
  for (const std::string& attribute : config.protected_attributes) {
    MethodFit b = base;
    b.attribute = attribute;
    b.error = fit.base_error;
    fit.methods.push_back(std::move(b));
    const ColumnSpec& column = cohort.schema()[cohort.ColumnIndex(attribute)];
    const std::vector<int> groups_all = cohort.GroupLabels(attribute);
    const std::vector<int> groups_train = Gather(std::span<const int>(groups_all), train);
    for (const MitigationSpec& spec : config.MitigationsFor(attribute)) {
      MethodFit m;
      m.attribute = attribute;
      m.method = std::string(MethodName(spec.method));
      try {
        switch (spec.method) {
          case MitigationMethod::kSup: {
            Suppression sup = Suppress(cohort, attribute);
            if (sup.warning) m.warnings.push_back(*sup.warning);
            DesignFit d = FitDesign(EncodeFeatures(sup.training), y, w, inner, config, false);
            m.selected_config = d.selected;
            m.model = std::move(d.model);
            m.imputer = std::move(d.imputer);
            break;
          }
          case MitigationMethod::kRw: {
            m.training_weights = Reweigh(groups_train, y_train);
            std::vector<double> w_full(w.begin(), w.end());
            for (size_t i = 0; i < train.size(); ++i) w_full[train[i]] *= m.training_weights[i];
            DesignFit d = FitDesign(encoded, y, w_full, inner, config, false);
            m.selected_config = d.selected;
            m.model = std::move(d.model);
            m.imputer = std::move(d.imputer);
            break;
          }
          case MitigationMethod::kDir: {
            const Cohort train_cohort = cohort.Subset(train);
            m.repairer = DisparateImpactRepairer::Fit(train_cohort, attribute, spec.repair_level);
            const Matrix repaired = EncodeFeatures(m.repairer->RepairFitted(train_cohort));
            DesignFit d = FitDesign(repaired, y_train, w_train, local, config, false);
            m.selected_config = d.selected;
            m.model = std::move(d.model);
            m.imputer = std::move(d.imputer);
            m.training_features = repaired;
            m.imputer.Apply(m.training_features);
            break;
          }
          case MitigationMethod::kPsta:
          case MitigationMethod::kCpp: {
            if (!fit.base_error.empty()) throw Error(ErrorCode::kBadValue, fit.base_error);
            if (spec.method == MitigationMethod::kCpp) {
              m.cpp = CppFit(fit.post_fit_scores, y_train, groups_train, spec.seed);
              for (const auto& [g, group] : m.cpp->groups) {
                if (!group.reachable) {
                  m.warnings.push_back("CPP cannot equalize generalized FNR for level '" +
                                       column.levels.at(static_cast<size_t>(g)) + "'");
                }
              }
            } else {
              PstaOptions options;
              options.grid_step = spec.grid_step;
              options.default_threshold = spec.default_threshold;
              options.num_levels = static_cast<int>(column.levels.size());
              if (!spec.unprivileged.empty()) options.unprivileged = LevelIds(spec.unprivileged, column);
              m.thresholds = PstaFit(fit.post_fit_scores, y_train, groups_train, options);
            }
            break;
          }
        }
      } catch (const Error& e) {
        m.error = e.what();
      }
      fit.methods.push_back(std::move(m));
    }
  }
  return fit;
}

// --- Experiment ------------------------------------------------------------

const CellReport* ExperimentReport::Find(std::string_view attribute,
                                         std::string_view method) const {
  for (const CellReport& cell : cells) {
    if (cell.attribute == attribute && cell.method == method) return &cell;
  }
  return nullptr;
}

size_t ExperimentReport::FailedCells() const {
  return static_cast<size_t>(
      std::count_if(cells.begin(), cells.end(), [](const CellReport& c) { return !c.ok; }));
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  return RunExperiment(config, LoadCohort(config));
}

ExperimentReport RunExperiment(const ExperimentConfig& config, const Cohort& cohort) {
  const auto start = std::chrono::steady_clock::now();
  config.Validate();
  for (const std::string& attribute : config.protected_attributes) {
    const ColumnSpec& column = cohort.schema()[cohort.ColumnIndex(attribute)];
    if (column.role != ColumnRole::kProtected) {
      throw Error(ErrorCode::kSchemaInvalid, "column '" + attribute + "' is not protected");
    }
  }
  const NestedPlan plan = NestedFolds(cohort, config.k_outer, config.k_inner, config.seed);
  const Matrix encoded = EncodeFeatures(cohort);
  const int k = plan.outer.k;
  std::vector<FoldFit> fits(static_cast<size_t>(k));
  std::vector<std::vector<CellFold>> scored(static_cast<size_t>(k));
  std::vector<std::string> fold_errors(static_cast<size_t>(k));
#pragma omp parallel for schedule(dynamic, 1)
  for (int f = 0; f < k; ++f) {
    try {
      fits[f] = FitFold(cohort, plan, f, config);
      scored[f] = ScoreFold(cohort, encoded, plan, fits[f]);
    } catch (const std::exception& e) {
      fold_errors[f] = e.what();
    }
  }
  for (int f = 0; f < k; ++f) {
    if (!fold_errors[f].empty()) throw Error(ErrorCode::kBadValue, "fold " + std::to_string(f) + ": " + fold_errors[f]);
  }

  ExperimentReport report;
  report.toolkit_version = std::string(kToolkitVersion);
  report.generated_at = config.fixed_clock ? "1970-01-01T00:00:00Z" : Timestamp();
  report.config = ExperimentConfigToJson(config);
  report.rows = cohort.num_rows();
  report.fold_assignments = plan.outer.assignments;
  report.best_method_rule = kBestMethodRule;

  const size_t per_fold = fits[0].methods.size();
  for (size_t i = 0; i < per_fold; ++i) {
    CellReport cell;
    cell.attribute = fits[0].methods[i].attribute;
    cell.method = fits[0].methods[i].method;
    std::vector<const CellFold*> folds;
    for (int f = 0; f < k; ++f) {
      const CellFold& c = scored[f][i];
      if (!c.error.empty() && cell.ok) {
        cell.ok = false;
        cell.error = "fold " + std::to_string(f) + ": " + c.error;
      }
      folds.push_back(&c);
      cell.selected_config.push_back(fits[f].methods[i].selected_config);
      for (const std::string& warning : fits[f].methods[i].warnings) {
        if (std::find(cell.warnings.begin(), cell.warnings.end(), warning) == cell.warnings.end()) {
          cell.warnings.push_back(warning);
        }
      }
    }
    if (cell.method != kBaseMethod && IsPostProcessing(ParseMethod(cell.method))) {
      cell.selected_config.clear();
    }
    if (cell.ok) {
      try {
        Aggregate(cohort, plan, folds, config, cell);
      } catch (const Error& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
    report.cells.push_back(std::move(cell));
  }

  for (const std::string& attribute : config.protected_attributes) {
    CellReport* base = nullptr;
    for (CellReport& c : report.cells) {
      if (c.attribute == attribute && c.method == kBaseMethod) base = &c;
    }
    AttributeSummary summary{attribute, ""};
    std::pair<std::string, std::string> reference;
    bool have_reference = false;
    if (base->ok) {
      try {
        reference = ReferenceGroups(config, *base);
        have_reference = true;
      } catch (const Error& e) {
        base->ok = false;
        base->error = e.what();
      }
    }
    for (CellReport& c : report.cells) {
      if (c.attribute != attribute || !c.ok) continue;
      if (!have_reference) {
        c.ok = false;
        c.error = "base cell failed: " + base->error;
        continue;
      }
      try {
        Summarize(config, reference.first, reference.second, c);
      } catch (const Error& e) {
        c.ok = false;
        c.error = e.what();
      }
    }
    const CellReport* best = nullptr;
    bool best_qualifies = false;
    for (const CellReport& c : report.cells) {
      if (c.attribute != attribute || c.method == kBaseMethod || !c.ok || !base->ok) continue;
      const bool qualifies =
          base->report.bacc_mean - c.report.bacc_mean <= config.bacc_tolerance + 1e-12;
      const double a = std::abs(c.fairness.eod);
      if (best == nullptr || (qualifies && !best_qualifies) ||
          (qualifies == best_qualifies && a < std::abs(best->fairness.eod))) {
        best = &c;
        best_qualifies = qualifies;
      }
    }
    if (best != nullptr) summary.best_method = best->method;
    report.attributes.push_back(summary);
  }

  std::stable_sort(report.cells.begin(), report.cells.end(),
                   [](const CellReport& a, const CellReport& b) {
                     return std::tie(a.attribute, a.method) < std::tie(b.attribute, b.method);
                   });
  std::sort(report.attributes.begin(), report.attributes.end(),
            [](const AttributeSummary& a, const AttributeSummary& b) {
              return a.attribute < b.attribute;
            });
  report.wall_clock_seconds =
      config.fixed_clock
          ? 0.0
          : std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace fairaudit
