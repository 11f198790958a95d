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
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fairaudit/error.h"
#include "fairaudit/harness.h"

namespace fairaudit {
namespace {

// Colour-blind-safe palette; index 0 is reserved for the base model.
constexpr const char* kPalette[16] = {
    "#000000", "#0072B2", "#E69F00", "#009E73", "#CC79A7", "#56B4E9", "#D55E00", "#F0E442",
    "#882255", "#44AA99", "#117733", "#332288", "#AA4499", "#DDCC77", "#999933", "#6699CC"};

std::string F(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string FileToken(std::string_view s) {
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

const char* MethodColor(std::string_view method) {
  static constexpr std::string_view kOrder[] = {"BASE", "SUP", "RW", "DIR", "CPP", "PSTA"};
  for (size_t i = 0; i < std::size(kOrder); ++i) {
    if (kOrder[i] == method) return kPalette[i];
  }
  return kPalette[15];
}

std::string Header(int width, int height, std::string_view title) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<title>" << Escape(title) << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#FFFFFF\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << Escape(title) << "</text>\n";
  return out.str();
}

void Write(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

double Band(const ExperimentReport& report) {
  if (report.config.is_object() && report.config.contains("fairness_band") &&
      report.config.at("fairness_band").is_number()) {
    return report.config.at("fairness_band").get<double>();
  }
  return 0.1;
}

}  // namespace

std::string ForestSvg(const ExperimentReport& report, const CellReport& base,
                      const CellReport& mitigated) {
  (void)report;
  if (!base.ok || !mitigated.ok) {
    throw Error(ErrorCode::kIncompleteReport,
                "forest plot needs successful base and " + mitigated.method + " cells");
  }
  constexpr double kLeft = 170.0, kRight = 610.0, kTop = 50.0, kRow = 22.0, kGap = 14.0;
  const size_t groups = base.report.groups.size();
  const double plot_bottom = kTop + static_cast<double>(groups) * (2 * kRow + kGap);
  const int height = static_cast<int>(plot_bottom + 60.0);
  auto x_of = [&](double tpr) { return kLeft + std::clamp(tpr, 0.0, 1.0) * (kRight - kLeft); };
  std::ostringstream out;
  out << Header(640, height,
                "TPR by " + base.attribute + ": BASE vs " + mitigated.method);
  out << "<g class=\"axis\" stroke=\"#888888\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double x = x_of(t / 4.0);
    out << "<line x1=\"" << F(x) << "\" y1=\"" << F(kTop - 6) << "\" x2=\"" << F(x) << "\" y2=\""
        << F(plot_bottom) << "\" stroke-dasharray=\"2,3\"/>\n";
  }
  out << "</g>\n<g class=\"tick-labels\" text-anchor=\"middle\">\n";
  for (int t = 0; t <= 4; ++t) {
    out << "<text x=\"" << F(x_of(t / 4.0)) << "\" y=\"" << F(plot_bottom + 16) << "\">"
        << F(t / 4.0) << "</text>\n";
  }
  out << "</g>\n<text x=\"" << F((kLeft + kRight) / 2) << "\" y=\"" << F(plot_bottom + 36)
      << "\" text-anchor=\"middle\">True positive rate (mean over folds)</text>\n";
  const CellReport* rows[2] = {&base, &mitigated};
  for (size_t g = 0; g < groups; ++g) {
    for (int r = 0; r < 2; ++r) {
      const CellReport& cell = *rows[r];
      const GroupStats* stats = nullptr;
      for (const GroupStats& s : cell.report.groups) {
        if (s.level == base.report.groups[g].level) stats = &s;
      }
      const double y = kTop + static_cast<double>(g) * (2 * kRow + kGap) + r * kRow + kRow / 2;
      const char* color = MethodColor(cell.method);
      out << "<text x=\"" << F(kLeft - 8) << "\" y=\"" << F(y + 4) << "\" text-anchor=\"end\">"
          << Escape(base.report.groups[g].level) << " (" << Escape(cell.method) << ")</text>\n";
      if (stats == nullptr || !std::isfinite(stats->mean_tpr)) continue;
      if (stats->included && std::isfinite(stats->half_width)) {
        out << "<line class=\"interval\" data-group=\"" << Escape(stats->level)
            << "\" data-method=\"" << Escape(cell.method) << "\" x1=\""
            << F(x_of(stats->mean_tpr - stats->half_width)) << "\" y1=\"" << F(y) << "\" x2=\""
            << F(x_of(stats->mean_tpr + stats->half_width)) << "\" y2=\"" << F(y)
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      }
      out << "<circle class=\"point\" cx=\"" << F(x_of(stats->mean_tpr)) << "\" cy=\"" << F(y)
          << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string ScatterSvg(const ExperimentReport& report, std::string_view attribute) {
  std::vector<const CellReport*> cells;
  const CellReport* base = report.Find(attribute, kBaseMethod);
  if (base == nullptr || !base->ok) {
    throw Error(ErrorCode::kIncompleteReport,
                "no successful base cell for '" + std::string(attribute) + "'");
  }
  for (const CellReport& c : report.cells) {
    if (c.attribute == attribute && c.ok) cells.push_back(&c);
  }
  const double band = Band(report);
  constexpr double kLeft = 80.0, kRight = 600.0, kTop = 40.0, kBottom = 420.0;
  double x_lo = -std::max(0.5, band + 0.1), x_hi = -x_lo;
  double y_lo = 1.0, y_hi = 0.0;
  for (const CellReport* c : cells) {
    x_lo = std::min(x_lo, std::floor((c->fairness.eod - 0.05) * 10.0) / 10.0);
    x_hi = std::max(x_hi, std::ceil((c->fairness.eod + 0.05) * 10.0) / 10.0);
    y_lo = std::min(y_lo, c->report.bacc_mean);
    y_hi = std::max(y_hi, c->report.bacc_mean);
  }
  y_lo = std::floor((y_lo - 0.02) / 0.05) * 0.05;
  y_hi = std::ceil((y_hi + 0.02) / 0.05) * 0.05;
  auto x_of = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * (kRight - kLeft); };
  auto y_of = [&](double v) { return kBottom - (v - y_lo) / (y_hi - y_lo) * (kBottom - kTop); };

  std::ostringstream out;
  out << Header(640, 480, "EOD vs balanced accuracy: " + std::string(attribute));
  out << "<rect class=\"fair-band\" data-eod-min=\"" << F(-band) << "\" data-eod-max=\""
      << F(band) << "\" x=\"" << F(x_of(-band)) << "\" y=\"" << F(kTop) << "\" width=\""
      << F(x_of(band) - x_of(-band)) << "\" height=\"" << F(kBottom - kTop)
      << "\" fill=\"#DDDDDD\" fill-opacity=\"0.6\"/>\n";
  out << "<g class=\"axis\" stroke=\"#444444\">\n"
      << "<line x1=\"" << F(kLeft) << "\" y1=\"" << F(kBottom) << "\" x2=\"" << F(kRight)
      << "\" y2=\"" << F(kBottom) << "\"/>\n"
      << "<line x1=\"" << F(kLeft) << "\" y1=\"" << F(kTop) << "\" x2=\"" << F(kLeft)
      << "\" y2=\"" << F(kBottom) << "\"/>\n"
      << "<line x1=\"" << F(x_of(0.0)) << "\" y1=\"" << F(kTop) << "\" x2=\"" << F(x_of(0.0))
      << "\" y2=\"" << F(kBottom) << "\" stroke-dasharray=\"3,3\"/>\n</g>\n";
  out << "<g class=\"tick-labels\">\n";
  const int x_steps = static_cast<int>(std::lround((x_hi - x_lo) / 0.1));
  for (int i = 0; i <= x_steps; i += 2) {
    const double v = x_lo + 0.1 * i;
    out << "<text x=\"" << F(x_of(v)) << "\" y=\"" << F(kBottom + 16)
        << "\" text-anchor=\"middle\">" << F(v) << "</text>\n";
  }
  const int y_steps = static_cast<int>(std::lround((y_hi - y_lo) / 0.05));
  for (int i = 0; i <= y_steps; ++i) {
    const double v = y_lo + 0.05 * i;
    out << "<text x=\"" << F(kLeft - 6) << "\" y=\"" << F(y_of(v) + 4)
        << "\" text-anchor=\"end\">" << F(v) << "</text>\n";
  }
  out << "</g>\n<text x=\"" << F((kLeft + kRight) / 2) << "\" y=\"" << F(kBottom + 36)
      << "\" text-anchor=\"middle\">Equal opportunity difference</text>\n"
      << "<text x=\"20\" y=\"" << F((kTop + kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << F((kTop + kBottom) / 2) << ")\">Balanced accuracy</text>\n";
  out << "<g class=\"markers\">\n";
  for (const CellReport* c : cells) {
    const double x = x_of(c->fairness.eod), y = y_of(c->report.bacc_mean);
    const char* color = MethodColor(c->method);
    if (c->method == kBaseMethod) {
      out << "<rect class=\"marker\" data-method=\"BASE\" x=\"" << F(x - 5) << "\" y=\""
          << F(y - 5) << "\" width=\"10\" height=\"10\" fill=\"" << color << "\">";
    } else {
      out << "<circle class=\"marker\" data-method=\"" << Escape(c->method) << "\" cx=\"" << F(x)
          << "\" cy=\"" << F(y) << "\" r=\"5\" fill=\"" << color << "\">";
    }
    out << "<title>" << Escape(c->method) << ": EOD " << F(c->fairness.eod) << ", BAcc "
        << F(c->report.bacc_mean) << "</title>"
        << (c->method == kBaseMethod ? "</rect>\n" : "</circle>\n");
  }
  out << "</g>\n<g class=\"legend\">\n";
  double ly = kTop + 8;
  for (const CellReport* c : cells) {
    out << "<rect x=\"" << F(kRight - 70) << "\" y=\"" << F(ly - 8) << "\" width=\"8\" height=\"8\" fill=\""
        << MethodColor(c->method) << "\"/>\n<text x=\"" << F(kRight - 58) << "\" y=\"" << F(ly)
        << "\">" << Escape(c->method) << "</text>\n";
    ly += 16;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

std::vector<std::filesystem::path> RenderFigures(const ExperimentReport& report,
                                                 const std::filesystem::path& outdir) {
  std::vector<std::string> attributes;
  for (const CellReport& c : report.cells) {
    if (std::find(attributes.begin(), attributes.end(), c.attribute) == attributes.end()) {
      attributes.push_back(c.attribute);
    }
  }
  std::sort(attributes.begin(), attributes.end());
  for (const std::string& a : attributes) {
    const CellReport* base = report.Find(a, kBaseMethod);
    if (base == nullptr || !base->ok) {
      throw Error(ErrorCode::kIncompleteReport, "no successful base cell for '" + a + "'");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + outdir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const std::string& a : attributes) {
    const CellReport* base = report.Find(a, kBaseMethod);
    for (const CellReport& c : report.cells) {
      if (c.attribute != a || c.method == kBaseMethod || !c.ok) continue;
      written.push_back(outdir / ("forest_" + FileToken(a) + "_" + FileToken(c.method) + ".svg"));
      Write(written.back(), ForestSvg(report, *base, c));
    }
    written.push_back(outdir / ("scatter_" + FileToken(a) + ".svg"));
    Write(written.back(), ScatterSvg(report, a));
  }
  return written;
}

}  // namespace fairaudit
