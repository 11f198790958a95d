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

#ifndef FAIRAUDIT_SYNTH_H_
#define FAIRAUDIT_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fairaudit/cohort.h"
#include "json.hpp"

namespace fairaudit {

struct SyntheticGroup {
  std::string label;
  double proportion = 0.5;
  double prevalence = 0.1;
};

// Synthetic cohort with per-group outcome prevalence, `n_numeric`
// informative features (noise_scale * N(0,1) + effect * y) and one proxy
// feature correlated with membership in the first group.
struct CohortSpec {
  int n = 1000;
  std::vector<SyntheticGroup> groups;
  int n_numeric = 5;
  double proxy_strength = 0.0;
  double noise_scale = 1.0;
  double effect = 1.0;
  uint64_t seed = 0;
  std::string attribute = "group";

  void Validate() const;
};

CohortSpec CohortSpecFromJson(const nlohmann::json& doc);
nlohmann::json CohortSpecToJson(const CohortSpec& spec);

// Intercept b with sigmoid(b) within `tolerance` of `prevalence`, by bisection.
double SolveGroupIntercept(double prevalence, double tolerance = 1e-12);

// Noise standard deviation giving corr(indicator + noise, indicator) = strength
// for an indicator with success probability `share`.
double ProxyNoiseScale(double strength, double share);

Cohort GenerateCohort(const CohortSpec& spec);

}  // namespace fairaudit

#endif  // FAIRAUDIT_SYNTH_H_
