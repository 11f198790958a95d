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

#include "fairaudit/mitigation.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "fairaudit/metrics.h"
#include "test_util.h"

namespace fairaudit {
namespace {

using testing::CodeOf;
using testing::GroupCohort;

Cohort SexCohort() {
  const Schema schema{{"age", ColumnKind::kNumeric, ColumnRole::kFeature, {}},
                      {"sex", ColumnKind::kCategorical, ColumnRole::kProtected, {"F", "M"}},
                      {"smoker", ColumnKind::kCategorical, ColumnRole::kFeature, {"no", "yes"}},
                      {"dep", ColumnKind::kNumeric, ColumnRole::kOutcome, {}}};
  return ParseCsv("age,sex,smoker,dep\n30,F,no,1\n40,M,yes,0\n50,F,yes,0\n60,M,no,1\n", schema);
}

TEST(SuppressTest, RemovesColumnKeepsGroups) {
  const Cohort c = SexCohort();
  const Suppression s = Suppress(c, "sex");
  for (const std::string& name : EncodeFeatures(s.training).names) {
    EXPECT_EQ(name.rfind("sex", 0), std::string::npos) << name;
  }
  EXPECT_EQ(s.evaluation_groups, c.GroupLabels("sex"));
  EXPECT_FALSE(s.warning);
}

TEST(SuppressTest, NonProtectedColumnWarns) {
  const Suppression s = Suppress(SexCohort(), "smoker");
  ASSERT_TRUE(s.warning);
  EXPECT_TRUE(s.evaluation_groups.empty());
  EXPECT_FALSE(s.training.FindColumn("smoker"));
}

TEST(ReweighTest, IndependentCohortIsUnweighted) {
  const std::vector<int> g{0, 0, 0, 0, 1, 1, 1, 1};
  const std::vector<uint8_t> y{1, 0, 1, 0, 1, 0, 1, 0};
  for (double w : Reweigh(g, y)) EXPECT_EQ(w, 1.0);
}

TEST(ReweighTest, HandExample) {
  const std::vector<int> g{0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  const std::vector<uint8_t> y{1, 1, 0, 0, 0, 0, 1, 1, 0, 0};
  const std::vector<double> w = Reweigh(g, y);
  EXPECT_NEAR(w[0], 1.2, 1e-12);
  EXPECT_NEAR(w[2], 0.9, 1e-12);
  EXPECT_NEAR(w[6], 0.8, 1e-12);
  EXPECT_NEAR(w[8], 1.2, 1e-12);
}

TEST(ReweighTest, FactorizesOnRandomCohorts) {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 20 + rng.Below(300);
    const int m = 2 + static_cast<int>(rng.Below(3));
    std::vector<int> g(n);
    std::vector<uint8_t> y(n);
    for (size_t i = 0; i < n; ++i) {
      g[i] = i < static_cast<size_t>(2 * m) ? static_cast<int>(i / 2) : static_cast<int>(rng.Below(m));
      y[i] = i < static_cast<size_t>(2 * m) ? i % 2 : rng.Uniform() < 0.3 + 0.1 * g[i];
    }
    const std::vector<double> w = Reweigh(g, y);
    double total = 0;
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> by_group, by_label;
    for (size_t i = 0; i < n; ++i) {
      total += w[i];
      joint[{g[i], y[i]}] += w[i];
      by_group[g[i]] += w[i];
      by_label[y[i]] += w[i];
    }
    EXPECT_NEAR(total, static_cast<double>(n), 1e-9);
    for (const auto& [cell, mass] : joint) {
      EXPECT_NEAR(mass / total, by_group[cell.first] / total * by_label[cell.second] / total, 1e-9);
    }
  }
}

TEST(ReweighTest, EmptyCell) {
  const std::vector<int> g{0, 0, 1, 1};
  const std::vector<uint8_t> y{1, 0, 1, 1};
  EXPECT_EQ(CodeOf([&] { Reweigh(g, y); }), ErrorCode::kEmptyCell);
}

Cohort ThreeAndThree() {
  return GroupCohort({0, 0, 0, 1, 1, 1}, 2, {{1, 2, 3, 11, 12, 13}}, {1, 0, 1, 0, 1, 0});
}

std::vector<double> Column(const Cohort& c, std::string_view name) {
  auto v = c.values(c.ColumnIndex(name));
  return {v.begin(), v.end()};
}

TEST(DirTest, IdentityAtZero) {
  const Cohort c = ThreeAndThree();
  const Cohort r = DirRepair(c, "g", 0.0);
  EXPECT_FALSE(r.FindColumn("g"));
  EXPECT_EQ(Column(r, "f0"), Column(c, "f0"));
}

TEST(DirTest, FullRepairMeetsAtMedian) {
  const Cohort r = DirRepair(ThreeAndThree(), "g", 1.0);
  const std::vector<double> v = Column(r, "f0");
  EXPECT_EQ(v, (std::vector<double>{6, 7, 8, 6, 7, 8}));
}

TEST(DirTest, HalfRepairInterpolates) {
  const std::vector<double> v = Column(DirRepair(ThreeAndThree(), "g", 0.5), "f0");
  const std::vector<double> expected{3.5, 4.5, 5.5, 8.5, 9.5, 10.5};
  for (size_t i = 0; i < 6; ++i) EXPECT_NEAR(v[i], expected[i], 1e-12);
}

TEST(DirTest, RejectsBadLevel) {
  EXPECT_EQ(CodeOf([] { DirRepair(ThreeAndThree(), "g", 1.5); }), ErrorCode::kBadLambda);
}

TEST(DirTest, ApplyMapsUnseenRowsThroughTrainingCdf) {
  const Cohort train = ThreeAndThree();
  const auto repairer = DisparateImpactRepairer::Fit(train, "g", 1.0);
  // Training values re-applied land on the same repaired values.
  EXPECT_EQ(Column(repairer.Apply(train), "f0"), Column(repairer.RepairFitted(train), "f0"));
  const Cohort fresh = GroupCohort({0, 1}, 2, {{2.5, 100}}, {1, 0});
  const std::vector<double> v = Column(repairer.Apply(fresh), "f0");
  EXPECT_GE(v[0], 6.0);
  EXPECT_LE(v[0], 8.0);
  EXPECT_EQ(v[1], 8.0);
}

TEST(DirTest, MissingValuesPassThrough) {
  const Cohort c = GroupCohort({0, 0, 0, 1, 1, 1}, 2, {{1, std::nan(""), 3, 11, 12, 13}},
                               {1, 0, 1, 0, 1, 0});
  const std::vector<double> v = Column(DirRepair(c, "g", 1.0), "f0");
  EXPECT_TRUE(std::isnan(v[1]));
}

// Generalized-FNR cohort: one group at mean miss `g` with base rate `mu`.
struct CppCase {
  std::vector<double> p;
  std::vector<uint8_t> y;
  std::vector<int> groups;
};

void AddGroup(CppCase& c, int group, double gfnr, double base_rate, int rows) {
  const int positives = static_cast<int>(std::lround(base_rate * rows));
  for (int i = 0; i < rows; ++i) {
    c.groups.push_back(group);
    c.y.push_back(i < positives);
    c.p.push_back(i < positives ? 1.0 - gfnr : 0.1);
  }
}

TEST(CppTest, EqualRatesNeedNoMixing) {
  CppCase c;
  AddGroup(c, 0, 0.3, 0.5, 10);
  AddGroup(c, 1, 0.3, 0.2, 10);
  const CppPolicy policy = CppFit(c.p, c.y, c.groups, 1);
  EXPECT_NEAR(policy.groups.at(0).mix_rate, 0.0, 1e-12);
  EXPECT_NEAR(policy.groups.at(1).mix_rate, 0.0, 1e-12);
}

TEST(CppTest, AnalyticMixingRates) {
  const struct {
    double ga, gb, mub, alpha;
  } cases[] = {{0.4, 0.2, 0.3, 0.4}, {0.5, 0.35, 0.25, 0.375}};
  for (const auto& k : cases) {
    CppCase c;
    AddGroup(c, 0, k.ga, 0.5, 20);
    AddGroup(c, 1, k.gb, k.mub, 20);
    const CppPolicy policy = CppFit(c.p, c.y, c.groups, 3);
    EXPECT_NEAR(policy.groups.at(1).mix_rate, k.alpha, 1e-12);
    EXPECT_EQ(policy.groups.at(0).mix_rate, 0.0);
    EXPECT_NEAR(policy.groups.at(1).equalized_fnr, k.ga, 1e-9);
  }
}

TEST(CppTest, FlagsUnreachableTarget) {
  CppCase c;
  AddGroup(c, 0, 0.9, 0.5, 20);
  AddGroup(c, 1, 0.2, 0.3, 20);
  const CppPolicy policy = CppFit(c.p, c.y, c.groups, 1);
  EXPECT_FALSE(policy.groups.at(1).reachable);
  EXPECT_EQ(policy.groups.at(1).mix_rate, 1.0);
  EXPECT_NEAR(policy.groups.at(1).equalized_fnr, 0.7, 1e-12);
  EXPECT_TRUE(policy.groups.at(0).reachable);
}

TEST(CppTest, MonteCarloApplication) {
  CppCase c;
  AddGroup(c, 0, 0.4, 0.5, 20);
  AddGroup(c, 1, 0.2, 0.3, 20);
  const CppPolicy policy = CppFit(c.p, c.y, c.groups, 12345);
  const size_t draws = 200000;
  const std::vector<double> p(draws, 0.8);
  const std::vector<int> g(draws, 1);
  const std::vector<double> mixed = CppApply(policy, p, g);
  double miss = 0;
  for (double v : mixed) miss += 1.0 - v;
  EXPECT_NEAR(miss / draws, 0.4, 3e-3);
  EXPECT_EQ(CppApply(policy, p, g), mixed);
}

TEST(CppTest, UnknownGroupsPassThrough) {
  CppCase c;
  AddGroup(c, 0, 0.4, 0.5, 10);
  AddGroup(c, 1, 0.2, 0.3, 10);
  const CppPolicy policy = CppFit(c.p, c.y, c.groups, 1);
  size_t unknown = 0;
  const auto out = CppApply(policy, std::vector<double>{0.7, 0.2}, std::vector<int>{5, 0}, &unknown);
  EXPECT_EQ(unknown, 1u);
  EXPECT_EQ(out[0], 0.7);
}

TEST(PstaTest, GridPoints) {
  const std::vector<double> grid = ThresholdGrid(0.01);
  ASSERT_EQ(grid.size(), 101u);
  EXPECT_EQ(grid[45], 0.45);
  EXPECT_EQ(grid.back(), 1.0);
  EXPECT_EQ(CodeOf([] { ThresholdGrid(0.0); }), ErrorCode::kEmptyGrid);
}

TEST(PstaTest, LargestMinimizer) {
  // Unprivileged positives 0.45, 0.35, 0.2; privileged positives put the
  // overall sensitivity at 2/6.
  const std::vector<double> p{0.45, 0.35, 0.2, 0.9, 0.8, 0.1, 0.3, 0.6};
  const std::vector<uint8_t> y{1, 1, 1, 1, 1, 1, 0, 0};
  const std::vector<int> g{1, 1, 1, 0, 0, 0, 1, 0};
  const ThresholdPolicy policy = PstaFit(p, y, g, {});
  EXPECT_NEAR(policy.overall_sensitivity, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(policy.unprivileged, (std::vector<int>{1}));
  EXPECT_EQ(policy.thresholds.at(1), 0.45);
  EXPECT_EQ(policy.thresholds.at(0), 0.5);
}

TEST(PstaTest, FixedPointAtDefault) {
  // Group 1 already matches the overall sensitivity and only 0.5 attains it
  // with the largest threshold among the minimizers.
  const std::vector<double> p{0.505, 0.2, 0.505, 0.2};
  const std::vector<uint8_t> y{1, 1, 1, 1};
  const std::vector<int> g{0, 0, 1, 1};
  PstaOptions options;
  options.unprivileged = std::vector<int>{1};
  EXPECT_EQ(PstaFit(p, y, g, options).thresholds.at(1), 0.5);
}

TEST(PstaTest, MatchesExhaustiveSweep) {
  Rng rng(500);
  const std::vector<double> grid = ThresholdGrid(0.01);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 10 + rng.Below(200);
    std::vector<double> p(n);
    std::vector<uint8_t> y(n);
    std::vector<int> g(n);
    for (size_t i = 0; i < n; ++i) {
      g[i] = i < 4 ? static_cast<int>(i / 2) : static_cast<int>(rng.Below(2));
      y[i] = i < 4 ? 1 : rng.Uniform() < 0.4;
      p[i] = std::round(rng.Uniform() * (g[i] ? 0.7 : 1.0) * 200.0) / 200.0;
    }
    PstaOptions options;
    options.unprivileged = std::vector<int>{1};
    const ThresholdPolicy policy = PstaFit(p, y, g, options);
    double pos = 0, hits = 0, pos_u = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!y[i]) continue;
      pos += 1;
      hits += p[i] >= 0.5;
      pos_u += g[i] == 1;
    }
    // Gaps compared as rationals over the common denominator pos * pos_u.
    long best_gap = -1;
    double best = -1;
    for (double t : grid) {
      long tp = 0;
      for (size_t i = 0; i < n; ++i) tp += y[i] && g[i] == 1 && p[i] >= t;
      const long gap = std::labs(tp * static_cast<long>(pos) - static_cast<long>(hits) * static_cast<long>(pos_u));
      if (best_gap < 0 || gap < best_gap) best_gap = gap;
    }
    for (double t : grid) {
      long tp = 0;
      for (size_t i = 0; i < n; ++i) tp += y[i] && g[i] == 1 && p[i] >= t;
      if (std::labs(tp * static_cast<long>(pos) - static_cast<long>(hits) * static_cast<long>(pos_u)) == best_gap) best = t;
    }
    EXPECT_EQ(policy.thresholds.at(1), best) << "trial " << trial;
  }
}

TEST(PstaTest, AutoDetectsLaggingGroups) {
  const std::vector<double> p{0.9, 0.8, 0.3, 0.4, 0.2, 0.1};
  const std::vector<uint8_t> y{1, 1, 1, 1, 1, 1};
  const std::vector<int> g{0, 0, 1, 1, 2, 2};
  const ThresholdPolicy policy = PstaFit(p, y, g, {});
  EXPECT_EQ(policy.unprivileged, (std::vector<int>{1, 2}));
}

TEST(ApplyThresholdsTest, UniformPolicyIsPlainRule) {
  Rng rng(3);
  std::vector<double> p(100);
  std::vector<int> g(100);
  for (size_t i = 0; i < 100; ++i) {
    p[i] = std::round(rng.Uniform() * 20) / 20;
    g[i] = static_cast<int>(rng.Below(3));
  }
  ThresholdPolicy policy;
  policy.thresholds = {{0, 0.5}, {1, 0.5}, {2, 0.5}};
  const auto out = ApplyThresholds(p, g, policy);
  for (size_t i = 0; i < 100; ++i) EXPECT_EQ(out.predictions[i], p[i] >= 0.5);
}

TEST(ApplyThresholdsTest, LoweredThresholdFlipsOnlyUnprivileged) {
  ThresholdPolicy policy;
  policy.thresholds = {{0, 0.5}, {1, 0.3}};
  const auto out = ApplyThresholds(std::vector<double>{0.4, 0.4, 0.4}, std::vector<int>{1, 0, 9}, policy);
  EXPECT_EQ(out.predictions, (std::vector<uint8_t>{1, 0, 0}));
  EXPECT_EQ(out.unknown_group_rows, 1u);
}

TEST(MitigationSpecTest, Validation) {
  MitigationSpec spec;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kConfigInvalid);
  spec.protected_attribute = "sex";
  spec.Validate();
  spec.grid_step = 0;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kEmptyGrid);
  spec = {};
  spec.protected_attribute = "sex";
  spec.method = MitigationMethod::kDir;
  spec.repair_level = -0.1;
  EXPECT_EQ(CodeOf([&] { spec.Validate(); }), ErrorCode::kBadLambda);
  EXPECT_EQ(ParseMethod("psta"), MitigationMethod::kPsta);
  EXPECT_EQ(MethodName(MitigationMethod::kRw), "RW");
  EXPECT_EQ(CodeOf([] { ParseMethod("magic"); }), ErrorCode::kConfigInvalid);
}

}  // namespace
}  // namespace fairaudit
