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

#include "fairaudit/models.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fairaudit/metrics.h"
#include "test_util.h"

namespace fairaudit {
namespace {

using testing::CodeOf;

struct Data {
  Matrix x;
  std::vector<uint8_t> y;
  std::vector<double> w;
};

Data Informative(uint64_t seed, size_t n, size_t p, double effect = 1.0) {
  Rng rng(seed);
  Data d{Matrix(n, p, {}), std::vector<uint8_t>(n), std::vector<double>(n, 1.0)};
  for (size_t j = 0; j < p; ++j) d.x.names.push_back("x" + std::to_string(j));
  for (size_t i = 0; i < n; ++i) {
    d.y[i] = rng.Uniform() < 0.35;
    for (size_t j = 0; j < p; ++j) d.x(i, j) = rng.Normal() + (d.y[i] ? effect : 0.0) * (j == 0 ? 1.0 : 0.3);
  }
  return d;
}

// Repeats row `r` `times` times with unit weight, alongside a copy weighting
// it by `times`.
std::pair<Data, Data> DuplicationPair(const Data& base, size_t r, int times) {
  Data weighted = base;
  weighted.w[r] = times;
  Data repeated = base;
  for (int t = 1; t < times; ++t) {
    repeated.x.data.insert(repeated.x.data.end(), base.x.Row(r).begin(), base.x.Row(r).end());
    repeated.x.rows += 1;
    repeated.y.push_back(base.y[r]);
    repeated.w.push_back(1.0);
  }
  return {weighted, repeated};
}

TEST(LogisticTest, SeparableSlopeIsPositive) {
  Matrix x(40, 1, {"x"});
  std::vector<uint8_t> y(40);
  std::vector<double> w(40, 1.0);
  for (size_t i = 0; i < 40; ++i) {
    x(i, 0) = static_cast<double>(i) - 19.5;
    y[i] = x(i, 0) > 0;
  }
  LogisticConfig cfg;
  cfg.l2_strength = 1e-3;
  const TrainedModel m = TrainLogistic(x, y, w, cfg);
  EXPECT_GT(std::get<LogisticParams>(m.params).coefficients[0], 0.0);
}

TEST(LogisticTest, GradientMatchesFiniteDifferences) {
  Rng rng(99);
  for (int dataset = 0; dataset < 3; ++dataset) {
    Data d = Informative(100 + dataset, 150, 4);
    for (double& v : d.w) v = 0.2 + rng.Uniform();
    const LogisticObjective objective(d.x, d.y, d.w, 0.3);
    for (int point = 0; point < 5; ++point) {
      std::vector<double> beta(objective.dimension());
      for (double& b : beta) b = rng.Normal();
      const std::vector<double> g = objective.Gradient(beta);
      for (size_t j = 0; j < beta.size(); ++j) {
        std::vector<double> up = beta, down = beta;
        up[j] += 1e-5;
        down[j] -= 1e-5;
        const double fd = (objective.Value(up) - objective.Value(down)) / 2e-5;
        EXPECT_LE(std::abs(fd - g[j]), 1e-6 * std::max(1.0, std::abs(g[j])));
      }
    }
  }
}

TEST(LogisticTest, WeightEqualsDuplication) {
  const Data base = Informative(7, 120, 3);
  const auto [weighted, repeated] = DuplicationPair(base, 5, 3);
  LogisticConfig cfg;
  cfg.l2_strength = 0.05;
  const LogisticObjective a(weighted.x, weighted.y, weighted.w, cfg.l2_strength);
  const LogisticObjective b(repeated.x, repeated.y, repeated.w, cfg.l2_strength);
  const std::vector<double> beta{0.1, -0.4, 0.7, 0.2};
  EXPECT_NEAR(a.Value(beta), b.Value(beta), 1e-12);
  const TrainedModel ma = TrainLogistic(weighted.x, weighted.y, weighted.w, cfg);
  const TrainedModel mb = TrainLogistic(repeated.x, repeated.y, repeated.w, cfg);
  const auto& pa = std::get<LogisticParams>(ma.params);
  const auto& pb = std::get<LogisticParams>(mb.params);
  EXPECT_NEAR(pa.intercept, pb.intercept, 1e-10);
  for (size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(pa.coefficients[j] / ma.feature_scale[j], pb.coefficients[j] / mb.feature_scale[j], 1e-10);
  }
  const auto qa = PredictProba(ma, base.x), qb = PredictProba(mb, base.x);
  for (size_t i = 0; i < qa.size(); ++i) EXPECT_NEAR(qa[i], qb[i], 1e-10);
}

TEST(LogisticTest, ConvergesWithMonotoneLoss) {
  const Data d = Informative(3, 400, 5);
  const TrainedModel m = TrainLogistic(d.x, d.y, d.w, {});
  EXPECT_TRUE(m.converged);
  for (size_t i = 1; i < m.loss_trace.size(); ++i) EXPECT_LE(m.loss_trace[i], m.loss_trace[i - 1] + 1e-15);
}

TEST(LogisticTest, RejectsBadInputs) {
  Data d = Informative(1, 30, 2);
  std::vector<uint8_t> ones(30, 1);
  EXPECT_EQ(CodeOf([&] { TrainLogistic(d.x, ones, d.w, {}); }), ErrorCode::kDegenerateLabels);
  Data nan = d;
  nan.x(3, 1) = std::nan("");
  EXPECT_EQ(CodeOf([&] { TrainLogistic(nan.x, nan.y, nan.w, {}); }), ErrorCode::kBadValue);
  std::vector<double> short_w(10, 1.0);
  EXPECT_EQ(CodeOf([&] { TrainLogistic(d.x, d.y, short_w, {}); }), ErrorCode::kLengthMismatch);
  LogisticConfig bad;
  bad.l2_strength = -1;
  EXPECT_EQ(CodeOf([&] { TrainLogistic(d.x, d.y, d.w, bad); }), ErrorCode::kConfigInvalid);
}

TEST(GbtTest, RejectsZeroRounds) {
  const Data d = Informative(1, 30, 2);
  GbtConfig cfg;
  cfg.rounds = 0;
  EXPECT_EQ(CodeOf([&] { TrainGbt(d.x, d.y, d.w, cfg); }), ErrorCode::kConfigInvalid);
}

TEST(GbtTest, StumpLearnsStep) {
  Matrix x(50, 1, {"x"});
  std::vector<uint8_t> y(50);
  std::vector<double> w(50, 1.0);
  for (size_t i = 0; i < 50; ++i) {
    x(i, 0) = static_cast<double>(i);
    y[i] = i >= 30;
  }
  GbtConfig cfg;
  cfg.rounds = 1;
  cfg.max_depth = 1;
  const TrainedModel m = TrainGbt(x, y, w, cfg);
  const auto p = PredictProba(m, x);
  const double bacc = BalancedAccuracy(ConfusionAtThreshold(p, y, 0.5));
  EXPECT_GE(bacc, 0.5);
  const auto& tree = std::get<GbtParams>(m.params).trees.at(0);
  ASSERT_EQ(tree.nodes[0].feature, 0);
  EXPECT_GE(tree.nodes[0].threshold, 29.0);
  EXPECT_LT(tree.nodes[0].threshold, 30.0);
}

TEST(GbtTest, ProbabilitiesInRange) {
  const Data d = Informative(12, 300, 4, 2.0);
  GbtConfig cfg;
  cfg.rounds = 40;
  cfg.max_depth = 3;
  cfg.learning_rate = 0.3;
  const TrainedModel m = TrainGbt(d.x, d.y, d.w, cfg);
  const Data other = Informative(13, 200, 4, 5.0);
  for (double p : PredictProba(m, other.x)) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(GbtTest, WeightEqualsDuplication) {
  const Data base = Informative(21, 150, 3);
  const auto [weighted, repeated] = DuplicationPair(base, 11, 3);
  GbtConfig cfg;
  cfg.rounds = 20;
  cfg.max_depth = 3;
  const TrainedModel ma = TrainGbt(weighted.x, weighted.y, weighted.w, cfg);
  const TrainedModel mb = TrainGbt(repeated.x, repeated.y, repeated.w, cfg);
  const auto qa = PredictProba(ma, base.x), qb = PredictProba(mb, base.x);
  for (size_t i = 0; i < qa.size(); ++i) EXPECT_NEAR(qa[i], qb[i], 1e-10);
}

TEST(GbtTest, SubsamplingIsSeeded) {
  const Data d = Informative(5, 200, 3);
  GbtConfig cfg;
  cfg.subsample = 0.5;
  cfg.subsample_seed = 9;
  const auto a = PredictProba(TrainGbt(d.x, d.y, d.w, cfg), d.x);
  const auto b = PredictProba(TrainGbt(d.x, d.y, d.w, cfg), d.x);
  EXPECT_EQ(a, b);
}

TrainedModel ZeroLogistic(size_t p) {
  TrainedModel m;
  m.params = LogisticParams{0.0, std::vector<double>(p, 0.0)};
  for (size_t j = 0; j < p; ++j) m.feature_names.push_back("x" + std::to_string(j));
  m.feature_sd.assign(p, 1.0);
  return m;
}

TEST(PredictTest, ZeroModelIsOneHalf) {
  const Data d = Informative(2, 25, 3);
  for (double p : PredictProba(ZeroLogistic(3), d.x)) EXPECT_EQ(p, 0.5);
}

TEST(PredictTest, RowPermutationCommutes) {
  const Data d = Informative(4, 100, 3);
  const TrainedModel m = TrainLogistic(d.x, d.y, d.w, {});
  std::vector<size_t> perm(100);
  std::iota(perm.begin(), perm.end(), size_t{0});
  Rng rng(1);
  rng.Shuffle(std::span<size_t>(perm));
  const auto p = PredictProba(m, d.x);
  const auto q = PredictProba(m, d.x.SelectRows(perm));
  for (size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(q[i], p[perm[i]]);
}

TEST(PredictTest, FeatureMismatch) {
  const Data d = Informative(4, 40, 3);
  const TrainedModel m = TrainLogistic(d.x, d.y, d.w, {});
  const Data wrong = Informative(4, 40, 2);
  EXPECT_EQ(CodeOf([&] { PredictProba(m, wrong.x); }), ErrorCode::kFeatureMismatch);
  Data renamed = d;
  renamed.x.names[1] = "other";
  EXPECT_EQ(CodeOf([&] { PredictProba(m, renamed.x); }), ErrorCode::kFeatureMismatch);
}

TEST(ImportanceTest, LogisticDominance) {
  TrainedModel m = ZeroLogistic(2);
  std::get<LogisticParams>(m.params).coefficients = {2.0, 0.0};
  const auto ranked = FeatureImportance(m);
  EXPECT_EQ(ranked[0].first, "x0");
  EXPECT_GT(ranked[0].second, ranked[1].second);
}

TEST(ImportanceTest, AllZeroKeepsOrder) {
  const auto ranked = FeatureImportance(ZeroLogistic(4));
  for (size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(ranked[j].first, "x" + std::to_string(j));
    EXPECT_EQ(ranked[j].second, 0.0);
  }
}

TEST(ImportanceTest, StumpCreditsSplitFeature) {
  Matrix x(60, 3, {"a", "b", "c"});
  std::vector<uint8_t> y(60);
  std::vector<double> w(60, 1.0);
  Rng rng(6);
  for (size_t i = 0; i < 60; ++i) {
    y[i] = i % 2;
    x(i, 0) = 1.0;
    x(i, 1) = y[i] ? 5.0 : -5.0;
    x(i, 2) = 2.0;
  }
  GbtConfig cfg;
  cfg.rounds = 1;
  cfg.max_depth = 1;
  const auto ranked = FeatureImportance(TrainGbt(x, y, w, cfg));
  EXPECT_EQ(ranked[0].first, "b");
  EXPECT_GT(ranked[0].second, 0.0);
  EXPECT_EQ(ranked[1].second, 0.0);
  EXPECT_EQ(ranked[2].second, 0.0);
}

InnerPlan WholePlan(const Data& d, int k, uint64_t seed) {
  InnerPlan inner;
  inner.rows.resize(d.x.rows);
  std::iota(inner.rows.begin(), inner.rows.end(), size_t{0});
  inner.plan = StratifiedKFold(d.y, k, seed);
  return inner;
}

ModelConfig L2(double strength) {
  LogisticConfig cfg;
  cfg.l2_strength = strength;
  return cfg;
}

TEST(GridTest, SingleCandidate) {
  const Data d = Informative(8, 200, 3);
  const std::vector<ModelConfig> grid{L2(0.1)};
  const GridSelection s = SelectConfig(d.x, d.y, d.w, grid, WholePlan(d, 3, 1), SelectionMetric::kBalancedAccuracy);
  EXPECT_EQ(s.best_index, 0u);
}

TEST(GridTest, DuplicateKeepsEarliest) {
  const Data d = Informative(9, 300, 3);
  const std::vector<ModelConfig> grid{L2(1e3), L2(1e-3), L2(1e-3)};
  const GridSelection s = SelectConfig(d.x, d.y, d.w, grid, WholePlan(d, 3, 2),
                                        SelectionMetric::kBalancedAccuracy);
  EXPECT_EQ(s.mean_scores[1], s.mean_scores[2]);
  EXPECT_EQ(s.best_index, 1u);
}

TEST(GridTest, HeavyPenaltyLoses) {
  const Data d = Informative(10, 400, 4, 1.5);
  const std::vector<ModelConfig> grid{L2(1e4), L2(1e-4)};
  const GridSelection s = SelectConfig(d.x, d.y, d.w, grid, WholePlan(d, 3, 3), SelectionMetric::kBalancedAccuracy);
  EXPECT_GT(s.mean_scores[1], s.mean_scores[0]);
  EXPECT_EQ(s.best_index, 1u);
}

TEST(GridTest, OutOfFoldPredictionsAreHeldOut) {
  const Data d = Informative(11, 150, 2);
  const std::vector<ModelConfig> grid{L2(0.1)};
  const InnerPlan inner = WholePlan(d, 3, 4);
  const GridSelection s = SelectConfig(d.x, d.y, d.w, grid, inner, SelectionMetric::kBalancedAccuracy, true);
  ASSERT_EQ(s.out_of_fold.size(), 150u);
  const std::vector<size_t> train = inner.plan.TrainRows(0), test = inner.plan.TestRows(0);
  const TrainedModel m = TrainLogistic(d.x.SelectRows(train), Gather(std::span<const uint8_t>(d.y), train),
                                       Gather(std::span<const double>(d.w), train), std::get<LogisticConfig>(grid[0]));
  const auto p = PredictProba(m, d.x.SelectRows(test));
  for (size_t i = 0; i < test.size(); ++i) EXPECT_NEAR(s.out_of_fold[test[i]], p[i], 1e-12);
}

TEST(GridTest, EmptyGrid) {
  const Data d = Informative(8, 60, 2);
  EXPECT_EQ(CodeOf([&] { SelectConfig(d.x, d.y, d.w, {}, WholePlan(d, 2, 1), SelectionMetric::kAuc); }),
            ErrorCode::kEmptyGrid);
}

TEST(ModelIoTest, JsonRoundTrip) {
  const Data d = Informative(14, 200, 3);
  GbtConfig gbt;
  gbt.rounds = 10;
  for (const ModelConfig& cfg : {ModelConfig(L2(0.01)), ModelConfig(gbt)}) {
    const TrainedModel m = Train(cfg, d.x, d.y, d.w);
    const TrainedModel back = ModelFromJson(nlohmann::json::parse(ModelToJson(m).dump()));
    EXPECT_EQ(PredictProba(back, d.x), PredictProba(m, d.x));
    EXPECT_EQ(ConfigFromJson(ConfigToJson(cfg)), cfg);
  }
  EXPECT_EQ(CodeOf([] { ModelFromJson({{"format", "other"}}); }), ErrorCode::kConfigInvalid);
}

}  // namespace
}  // namespace fairaudit
