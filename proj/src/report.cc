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

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "fairaudit/error.h"
#include "fairaudit/harness.h"

namespace fairaudit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

nlohmann::json Num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// Rounds every floating-point number to six significant digits.
void Round(nlohmann::json& doc) {
  if (doc.is_number_float()) {
    const double v = doc.get<double>();
    doc = std::isfinite(v) ? nlohmann::json(std::strtod(Sig6(v).c_str(), nullptr))
                           : nlohmann::json(nullptr);
  } else if (doc.is_structured()) {
    for (auto& child : doc) Round(child);
  }
}

double GetNum(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return kNaN;
  return obj.at(key).get<double>();
}

nlohmann::json CountsJson(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

ConfusionCounts CountsFromJson(const nlohmann::json& doc) {
  return {GetNum(doc, "tp"), GetNum(doc, "fp"), GetNum(doc, "tn"), GetNum(doc, "fn")};
}

nlohmann::json Interval(double mean, double half_width, std::span<const double> folds) {
  nlohmann::json values = nlohmann::json::array();
  for (double v : folds) values.push_back(Num(v));
  return {{"mean", Num(mean)}, {"ci_half_width", Num(half_width)}, {"folds", values}};
}

nlohmann::json CellJson(const CellReport& cell) {
  nlohmann::json doc = {{"attribute", cell.attribute},
                        {"method", cell.method},
                        {"status", cell.ok ? "ok" : "failed"}};
  if (!cell.ok) {
    doc["error"] = cell.error;
    return doc;
  }
  const GroupReport& r = cell.report;
  const FairnessSummary& f = cell.fairness;
  doc["fairness"] = {{"eod", Num(f.eod)},
                     {"gamma", Num(f.gamma)},
                     {"privileged", f.privileged},
                     {"unprivileged", f.unprivileged},
                     {"fair", f.fair}};
  doc["performance"] = {
      {"bacc", Interval(r.bacc_mean, r.bacc_half_width, r.fold_bacc)},
      {"auc", Interval(r.auc_mean, r.auc_half_width, r.fold_auc)},
      {"pooled",
       {{"counts", CountsJson(r.pooled)},
        {"sensitivity", Num(r.sensitivity)},
        {"specificity", Num(r.specificity)},
        {"bacc", Num(r.pooled_bacc)}}}};
  nlohmann::json groups = nlohmann::json::array();
  for (size_t g = 0; g < r.groups.size(); ++g) {
    const GroupStats& s = r.groups[g];
    nlohmann::json differs = nlohmann::json::array();
    for (size_t h = 0; h < r.groups.size(); ++h) {
      if (r.significant.size() > g && r.significant[g][h]) differs.push_back(r.groups[h].level);
    }
    nlohmann::json fold_tprs = nlohmann::json::array();
    for (double v : s.fold_tprs) fold_tprs.push_back(Num(v));
    groups.push_back({{"level", s.level},
                      {"included", s.included},
                      {"pooled", CountsJson(s.pooled)},
                      {"pooled_tpr", Num(s.pooled_tpr)},
                      {"pooled_fpr", Num(s.pooled_fpr)},
                      {"fold_tprs", fold_tprs},
                      {"mean_tpr", Num(s.mean_tpr)},
                      {"ci_half_width", Num(s.half_width)},
                      {"significantly_different_from", differs}});
  }
  doc["group_report"] = {{"attribute", r.attribute},
                         {"q_critical", Num(r.q_critical)},
                         {"ms_within", Num(r.ms_within)},
                         {"groups", groups}};
  if (!cell.selected_config.empty()) doc["selected_config"] = cell.selected_config;
  if (!cell.fold_policies.empty()) doc["fold_policies"] = cell.fold_policies;
  doc["unknown_group_rows"] = cell.unknown_group_rows;
  doc["warnings"] = cell.warnings;
  return doc;
}

CellReport CellFromJson(const nlohmann::json& doc) {
  CellReport cell;
  cell.attribute = doc.at("attribute").get<std::string>();
  cell.method = doc.at("method").get<std::string>();
  cell.ok = doc.at("status").get<std::string>() == "ok";
  if (!cell.ok) {
    cell.error = doc.value("error", "");
    return cell;
  }
  const nlohmann::json& f = doc.at("fairness");
  cell.fairness = {GetNum(f, "eod"), GetNum(f, "gamma"), f.at("privileged").get<std::string>(),
                   f.at("unprivileged").get<std::string>(), f.at("fair").get<bool>()};
  GroupReport& r = cell.report;
  const nlohmann::json& perf = doc.at("performance");
  auto folds = [](const nlohmann::json& arr) {
    std::vector<double> out;
    for (const auto& v : arr) out.push_back(v.is_null() ? kNaN : v.get<double>());
    return out;
  };
  r.bacc_mean = GetNum(perf.at("bacc"), "mean");
  r.bacc_half_width = GetNum(perf.at("bacc"), "ci_half_width");
  r.fold_bacc = folds(perf.at("bacc").at("folds"));
  r.auc_mean = GetNum(perf.at("auc"), "mean");
  r.auc_half_width = GetNum(perf.at("auc"), "ci_half_width");
  r.fold_auc = folds(perf.at("auc").at("folds"));
  r.pooled = CountsFromJson(perf.at("pooled").at("counts"));
  r.sensitivity = GetNum(perf.at("pooled"), "sensitivity");
  r.specificity = GetNum(perf.at("pooled"), "specificity");
  r.pooled_bacc = GetNum(perf.at("pooled"), "bacc");
  const nlohmann::json& gr = doc.at("group_report");
  r.attribute = gr.at("attribute").get<std::string>();
  r.q_critical = GetNum(gr, "q_critical");
  r.ms_within = GetNum(gr, "ms_within");
  for (const nlohmann::json& g : gr.at("groups")) {
    GroupStats s;
    s.level = g.at("level").get<std::string>();
    s.included = g.at("included").get<bool>();
    s.pooled = CountsFromJson(g.at("pooled"));
    s.pooled_tpr = GetNum(g, "pooled_tpr");
    s.pooled_fpr = GetNum(g, "pooled_fpr");
    s.fold_tprs = folds(g.at("fold_tprs"));
    s.mean_tpr = GetNum(g, "mean_tpr");
    s.half_width = GetNum(g, "ci_half_width");
    r.groups.push_back(std::move(s));
  }
  const size_t m = r.groups.size();
  r.significant.assign(m, std::vector<bool>(m, false));
  size_t g = 0;
  for (const nlohmann::json& entry : gr.at("groups")) {
    for (const auto& level : entry.at("significantly_different_from")) {
      for (size_t h = 0; h < m; ++h) {
        if (r.groups[h].level == level.get<std::string>()) r.significant[g][h] = true;
      }
    }
    ++g;
  }
  if (doc.contains("selected_config")) {
    cell.selected_config = doc.at("selected_config").get<std::vector<size_t>>();
  }
  if (doc.contains("fold_policies")) {
    for (const auto& p : doc.at("fold_policies")) cell.fold_policies.push_back(p);
  }
  cell.unknown_group_rows = doc.value("unknown_group_rows", size_t{0});
  cell.warnings = doc.value("warnings", std::vector<std::string>{});
  return cell;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvNum(double v) { return std::isfinite(v) ? Sig6(v) : ""; }

void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

}  // namespace

nlohmann::json ReportToJson(const ExperimentReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellReport& cell : report.cells) cells.push_back(CellJson(cell));
  nlohmann::json attributes = nlohmann::json::array();
  for (const AttributeSummary& a : report.attributes) {
    attributes.push_back({{"attribute", a.attribute},
                          {"best_method", a.best_method.empty() ? nlohmann::json(nullptr)
                                                                : nlohmann::json(a.best_method)}});
  }
  nlohmann::json doc = {
      {"format", "fairaudit.report"},
      {"toolkit_version", report.toolkit_version},
      {"generated_at", report.generated_at},
      {"wall_clock_seconds", report.wall_clock_seconds},
      {"config", report.config},
      {"rows", report.rows},
      {"fold_assignments", report.fold_assignments},
      {"best_method_rule", report.best_method_rule},
      {"attributes", attributes},
      {"cells", cells},
  };
  Round(doc);
  return doc;
}

ExperimentReport ReportFromJson(const nlohmann::json& doc) {
  try {
    if (doc.value("format", "") != "fairaudit.report") {
      throw Error(ErrorCode::kBadValue, "not a fairaudit report");
    }
    ExperimentReport report;
    report.toolkit_version = doc.at("toolkit_version").get<std::string>();
    report.generated_at = doc.at("generated_at").get<std::string>();
    report.wall_clock_seconds = GetNum(doc, "wall_clock_seconds");
    report.config = doc.at("config");
    report.rows = doc.at("rows").get<size_t>();
    report.fold_assignments = doc.at("fold_assignments").get<std::vector<int>>();
    report.best_method_rule = doc.at("best_method_rule").get<std::string>();
    for (const auto& a : doc.at("attributes")) {
      const auto& best = a.at("best_method");
      report.attributes.push_back(
          {a.at("attribute").get<std::string>(), best.is_null() ? "" : best.get<std::string>()});
    }
    for (const auto& c : doc.at("cells")) report.cells.push_back(CellFromJson(c));
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadValue, std::string("malformed report: ") + e.what());
  }
}

std::string SummaryCsv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "attribute,method,status,eod,gamma,privileged,unprivileged,fair,bacc_mean,"
         "bacc_ci_half_width,auc_mean,auc_ci_half_width,best,error\r\n";
  for (const CellReport& c : report.cells) {
    bool best = false;
    for (const AttributeSummary& a : report.attributes) {
      best = best || (a.attribute == c.attribute && a.best_method == c.method);
    }
    out << CsvField(c.attribute) << ',' << c.method << ',' << (c.ok ? "ok" : "failed") << ',';
    if (c.ok) {
      const FairnessSummary& f = c.fairness;
      const GroupReport& r = c.report;
      out << CsvNum(f.eod) << ',' << CsvNum(f.gamma) << ',' << CsvField(f.privileged) << ','
          << CsvField(f.unprivileged) << ',' << (f.fair ? "true" : "false") << ','
          << CsvNum(r.bacc_mean) << ',' << CsvNum(r.bacc_half_width) << ',' << CsvNum(r.auc_mean)
          << ',' << CsvNum(r.auc_half_width) << ',' << (best ? "true" : "false") << ",\r\n";
    } else {
      out << ",,,,,,,,,false," << CsvField(c.error) << "\r\n";
    }
  }
  return out.str();
}

std::string GroupsCsv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "attribute,method,level,included,mean_tpr,ci_half_width,pooled_tpr,pooled_fpr,tp,fp,tn,"
         "fn\r\n";
  for (const CellReport& c : report.cells) {
    if (!c.ok) continue;
    for (const GroupStats& g : c.report.groups) {
      out << CsvField(c.attribute) << ',' << c.method << ',' << CsvField(g.level) << ','
          << (g.included ? "true" : "false") << ',' << CsvNum(g.mean_tpr) << ','
          << CsvNum(g.half_width) << ',' << CsvNum(g.pooled_tpr) << ',' << CsvNum(g.pooled_fpr)
          << ',' << CsvNum(g.pooled.tp) << ',' << CsvNum(g.pooled.fp) << ','
          << CsvNum(g.pooled.tn) << ',' << CsvNum(g.pooled.fn) << "\r\n";
    }
  }
  return out.str();
}

std::vector<std::filesystem::path> WriteReport(const ExperimentReport& report,
                                               const std::filesystem::path& outdir,
                                               OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + outdir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format != OutputFormat::kCsv) {
    written.push_back(outdir / "report.json");
    WriteFile(written.back(), ReportToJson(report).dump(2) + "\n");
  }
  if (format != OutputFormat::kJson) {
    written.push_back(outdir / "summary.csv");
    WriteFile(written.back(), SummaryCsv(report));
    written.push_back(outdir / "groups.csv");
    WriteFile(written.back(), GroupsCsv(report));
  }
  return written;
}

}  // namespace fairaudit
