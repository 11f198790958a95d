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

#include "fairaudit/synth.h"

#include <cmath>
#include <limits>
#include <set>

#include "fairaudit/error.h"
#include "fairaudit/kernels.h"
#include "fairaudit/rng.h"

namespace fairaudit {

void CohortSpec::Validate() const {
  if (n < 100) throw Error(ErrorCode::kSpecInvalid, "n must be >= 100");
  if (groups.size() < 2) throw Error(ErrorCode::kSpecInvalid, "at least two groups are required");
  double total = 0.0;
  std::set<std::string> labels;
  for (const SyntheticGroup& g : groups) {
    if (!labels.insert(g.label).second || g.label.empty()) {
      throw Error(ErrorCode::kSpecInvalid, "group labels must be unique and non-empty");
    }
    if (!(g.proportion >= 0)) throw Error(ErrorCode::kSpecInvalid, "proportions must be >= 0");
    if (!(g.prevalence > 0 && g.prevalence < 1)) {
      throw Error(ErrorCode::kSpecInvalid, "prevalence of '" + g.label + "' must be in (0, 1)");
    }
    total += g.proportion;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kSpecInvalid, "proportions must sum to 1");
  if (n_numeric < 0) throw Error(ErrorCode::kSpecInvalid, "n_numeric must be >= 0");
  if (!(proxy_strength >= 0 && proxy_strength <= 1)) {
    throw Error(ErrorCode::kSpecInvalid, "proxy_strength must be in [0, 1]");
  }
  if (!(noise_scale > 0)) throw Error(ErrorCode::kSpecInvalid, "noise_scale must be > 0");
  if (!std::isfinite(effect)) throw Error(ErrorCode::kSpecInvalid, "effect must be finite");
  if (attribute.empty()) throw Error(ErrorCode::kSpecInvalid, "attribute name is empty");
}

CohortSpec CohortSpecFromJson(const nlohmann::json& doc) {
  try {
    CohortSpec spec;
    spec.n = doc.at("n").get<int>();
    for (const auto& g : doc.at("groups")) {
      spec.groups.push_back({g.at("label").get<std::string>(), g.at("proportion").get<double>(),
                             g.at("prevalence").get<double>()});
    }
    spec.n_numeric = doc.value("n_numeric", spec.n_numeric);
    spec.proxy_strength = doc.value("proxy_strength", spec.proxy_strength);
    spec.noise_scale = doc.value("noise_scale", spec.noise_scale);
    spec.effect = doc.value("effect", spec.effect);
    spec.seed = doc.value("seed", spec.seed);
    spec.attribute = doc.value("attribute", spec.attribute);
    spec.Validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSpecInvalid, e.what());
  }
}

nlohmann::json CohortSpecToJson(const CohortSpec& spec) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : spec.groups) {
    groups.push_back({{"label", g.label}, {"proportion", g.proportion}, {"prevalence", g.prevalence}});
  }
  return {{"n", spec.n},
          {"groups", groups},
          {"n_numeric", spec.n_numeric},
          {"proxy_strength", spec.proxy_strength},
          {"noise_scale", spec.noise_scale},
          {"effect", spec.effect},
          {"seed", spec.seed},
          {"attribute", spec.attribute}};
}

double SolveGroupIntercept(double prevalence, double tolerance) {
  double lo = -40.0, hi = 40.0;
  double mid = 0.0;
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double expected = kernels::Sigmoid(mid);
    if (std::abs(expected - prevalence) <= tolerance) break;
    (expected < prevalence ? lo : hi) = mid;
  }
  return mid;
}

double ProxyNoiseScale(double strength, double share) {
  if (strength <= 0) return std::numeric_limits<double>::infinity();
  const double variance = share * (1.0 - share);
  return std::sqrt(variance * (1.0 / (strength * strength) - 1.0));
}

Cohort GenerateCohort(const CohortSpec& spec) {
  spec.Validate();
  const size_t n = static_cast<size_t>(spec.n);
  const size_t m = spec.groups.size();
  std::vector<double> intercept(m);
  for (size_t g = 0; g < m; ++g) intercept[g] = SolveGroupIntercept(spec.groups[g].prevalence);
  const double proxy_noise = ProxyNoiseScale(spec.proxy_strength, spec.groups[0].proportion);

  Schema schema;
  ColumnSpec group_col{spec.attribute, ColumnKind::kCategorical, ColumnRole::kProtected, {}};
  for (const auto& g : spec.groups) group_col.levels.push_back(g.label);
  schema.push_back(group_col);
  for (int j = 0; j < spec.n_numeric; ++j) {
    schema.push_back({"x" + std::to_string(j + 1), ColumnKind::kNumeric, ColumnRole::kFeature, {}});
  }
  schema.push_back({"proxy", ColumnKind::kNumeric, ColumnRole::kFeature, {}});
  schema.push_back({"outcome", ColumnKind::kNumeric, ColumnRole::kOutcome, {}});

  std::vector<std::vector<double>> values(schema.size(), std::vector<double>(n));
  Rng rng(spec.seed);
  const size_t proxy_col = schema.size() - 2;
  const size_t outcome_col = schema.size() - 1;
  for (size_t r = 0; r < n; ++r) {
    const double u = rng.Uniform();
    size_t g = 0;
    double cumulative = spec.groups[0].proportion;
    while (g + 1 < m && u >= cumulative) cumulative += spec.groups[++g].proportion;
    const double y = rng.Uniform() < kernels::Sigmoid(intercept[g]) ? 1.0 : 0.0;
    values[0][r] = static_cast<double>(g);
    for (int j = 0; j < spec.n_numeric; ++j) {
      values[static_cast<size_t>(j) + 1][r] = spec.noise_scale * rng.Normal() + spec.effect * y;
    }
    const double noise = rng.Normal();
    const double indicator = g == 0 ? 1.0 : 0.0;
    values[proxy_col][r] = std::isinf(proxy_noise) ? noise : indicator + proxy_noise * noise;
    values[outcome_col][r] = y;
  }
  return Cohort(std::move(schema), std::move(values), {});
}

}  // namespace fairaudit
