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

#include "fairaudit/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fairaudit/error.h"

namespace fairaudit {
namespace {

void CheckLengths(size_t a, size_t b, std::span<const double> w) {
  if (a != b || (!w.empty() && w.size() != a)) {
    throw Error(ErrorCode::kLengthMismatch, "input vectors differ in length");
  }
}

double WeightAt(std::span<const double> w, size_t i) { return w.empty() ? 1.0 : w[i]; }

std::map<int, double> GroupTprImpl(std::span<const double> p, std::span<const uint8_t> y,
                                   std::span<const int> groups, auto threshold_of) {
  CheckLengths(p.size(), y.size(), {});
  CheckLengths(p.size(), groups.size(), {});
  std::map<int, std::pair<double, double>> hits;  // group -> (tp, positives)
  std::map<int, bool> present;
  for (size_t i = 0; i < p.size(); ++i) {
    present[groups[i]] = true;
    if (!y[i]) continue;
    auto& [tp, pos] = hits[groups[i]];
    pos += 1.0;
    if (p[i] >= threshold_of(groups[i])) tp += 1.0;
  }
  std::map<int, double> tpr;
  for (const auto& [g, unused] : present) {
    auto it = hits.find(g);
    if (it == hits.end()) {
      throw Error(ErrorCode::kNoPositivesInGroup, "group " + std::to_string(g));
    }
    tpr[g] = it->second.first / it->second.second;
  }
  return tpr;
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// P(range of `groups` iid standard normals <= w).
double RangeProbability(double w, int groups) {
  if (w <= 0) return 0.0;
  using Inner = boost::math::quadrature::gauss<double, 40>;
  auto integrand = [&](double z) {
    const double inside = NormalCdf(z) - NormalCdf(z - w);
    if (inside <= 0) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) * std::pow(inside, groups - 1);
  };
  // Composite rule over panels of width 2 covering the integrand's support.
  const double lo = -8.5;
  const double hi = 8.5 + w;
  const int panels = static_cast<int>(std::ceil((hi - lo) / 2.0));
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    total += Inner::integrate(integrand, lo + k * width, lo + (k + 1) * width);
  }
  return std::min(1.0, groups * total);
}

}  // namespace

double ConfusionCounts::Tpr() const {
  if (!(tp + fn > 0)) throw Error(ErrorCode::kUndefinedRate, "TPR with no positives");
  return tp / (tp + fn);
}

double ConfusionCounts::Fpr() const {
  if (!(tn + fp > 0)) throw Error(ErrorCode::kUndefinedRate, "FPR with no negatives");
  return fp / (tn + fp);
}

double ConfusionCounts::Tnr() const {
  if (!(tn + fp > 0)) throw Error(ErrorCode::kUndefinedRate, "TNR with no negatives");
  return tn / (tn + fp);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

ConfusionCounts ConfusionAtThreshold(std::span<const double> p, std::span<const uint8_t> y,
                                     double threshold, std::span<const double> w) {
  CheckLengths(p.size(), y.size(), w);
  ConfusionCounts c;
  for (size_t i = 0; i < p.size(); ++i) {
    const double wi = WeightAt(w, i);
    const bool predicted = p[i] >= threshold;
    if (y[i]) (predicted ? c.tp : c.fn) += wi;
    else (predicted ? c.fp : c.tn) += wi;
  }
  return c;
}

ConfusionCounts ConfusionFromPredictions(std::span<const uint8_t> predicted,
                                         std::span<const uint8_t> y, std::span<const double> w) {
  CheckLengths(predicted.size(), y.size(), w);
  ConfusionCounts c;
  for (size_t i = 0; i < y.size(); ++i) {
    const double wi = WeightAt(w, i);
    if (y[i]) (predicted[i] ? c.tp : c.fn) += wi;
    else (predicted[i] ? c.fp : c.tn) += wi;
  }
  return c;
}

std::map<int, double> GroupTpr(std::span<const double> p, std::span<const uint8_t> y,
                               std::span<const int> groups, double threshold) {
  return GroupTprImpl(p, y, groups, [threshold](int) { return threshold; });
}

std::map<int, double> GroupTpr(std::span<const double> p, std::span<const uint8_t> y,
                               std::span<const int> groups,
                               const std::map<int, double>& thresholds) {
  return GroupTprImpl(p, y, groups, [&](int g) {
    auto it = thresholds.find(g);
    if (it == thresholds.end()) {
      throw Error(ErrorCode::kUnknownGroup, "no threshold for group " + std::to_string(g));
    }
    return it->second;
  });
}

double Eod(double tpr_unprivileged, double tpr_privileged) {
  return tpr_unprivileged - tpr_privileged;
}

double Gamma(double tpr_a, double tpr_b) { return std::abs(tpr_a - tpr_b); }

double BalancedAccuracy(const ConfusionCounts& counts) {
  return 0.5 * (counts.Tpr() + counts.Tnr());
}

double AucRoc(std::span<const double> p, std::span<const uint8_t> y, std::span<const double> w) {
  CheckLengths(p.size(), y.size(), w);
  std::vector<size_t> order(p.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
  double wins = 0.0, neg_below = 0.0, pos_total = 0.0;
  for (size_t start = 0; start < order.size();) {
    size_t end = start;
    double pos_block = 0.0, neg_block = 0.0;
    while (end < order.size() && p[order[end]] == p[order[start]]) {
      const size_t i = order[end++];
      (y[i] ? pos_block : neg_block) += WeightAt(w, i);
    }
    wins += pos_block * neg_below + 0.5 * pos_block * neg_block;
    neg_below += neg_block;
    pos_total += pos_block;
    start = end;
  }
  if (!(pos_total > 0) || !(neg_below > 0)) {
    throw Error(ErrorCode::kDegenerateLabels, "AUC needs positives and negatives");
  }
  return wins / (pos_total * neg_below);
}

double StudentizedRangeCdf(double q, int groups, double df) {
  if (groups < 2 || !(df > 0)) {
    throw Error(ErrorCode::kConfigInvalid, "studentized range needs groups >= 2 and df > 0");
  }
  if (q <= 0) return 0.0;
  // Outer integral over s = sqrt(chi2_df / df), taken in u = log s where the
  // density is unimodal and smooth for every df.
  using Outer = boost::math::quadrature::gauss<double, 64>;
  boost::math::chi_squared_distribution<double> chi2(df);
  const double s_lo = std::sqrt(boost::math::quantile(chi2, 1e-15) / df);
  const double s_hi = std::sqrt(boost::math::quantile(boost::math::complement(chi2, 1e-15)) / df);
  const double log_norm = 0.5 * df * std::log(df) - boost::math::lgamma(0.5 * df) -
                          (0.5 * df - 1.0) * std::log(2.0);
  auto integrand = [&](double u) {
    const double s = std::exp(u);
    const double log_density = log_norm + df * u - 0.5 * df * s * s;  // f(s) * s
    return std::exp(log_density) * RangeProbability(q * s, groups);
  };
  const double u_lo = std::log(s_lo), u_hi = std::log(s_hi);
  constexpr int kPanels = 6;
  const double width = (u_hi - u_lo) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    total += Outer::integrate(integrand, u_lo + k * width, u_lo + (k + 1) * width);
  }
  return std::clamp(total, 0.0, 1.0);
}

double StudentizedRangeQuantile(double probability, int groups, double df, double tolerance) {
  if (!(probability > 0 && probability < 1)) {
    throw Error(ErrorCode::kConfigInvalid, "quantile probability must be in (0,1)");
  }
  static std::mutex mu;
  static std::map<std::tuple<double, int, double, double>, double> cache;
  const auto key = std::make_tuple(probability, groups, df, tolerance);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  double lo = 0.0, hi = 8.0;
  while (StudentizedRangeCdf(hi, groups, df) < probability) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw Error(ErrorCode::kConfigInvalid, "studentized range quantile diverged");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (StudentizedRangeCdf(mid, groups, df) < probability ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  std::lock_guard lock(mu);
  cache.emplace(key, q);
  return q;
}

double StudentTQuantile(double probability, double df) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), probability);
}

TukeyResult TukeyTprTest(const std::vector<std::vector<double>>& per_group_fold_tprs,
                         double alpha) {
  const size_t m = per_group_fold_tprs.size();
  if (m < 2) throw Error(ErrorCode::kInsufficientFolds, "Tukey test needs >= 2 groups");
  const size_t k = per_group_fold_tprs.front().size();
  for (const auto& folds : per_group_fold_tprs) {
    if (folds.size() != k) throw Error(ErrorCode::kInsufficientFolds, "unequal fold counts");
  }
  if (k < 2) throw Error(ErrorCode::kInsufficientFolds, "Tukey test needs >= 2 folds");
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorCode::kConfigInvalid, "alpha must be in (0,1)");

  TukeyResult result;
  result.groups = static_cast<int>(m);
  result.folds = static_cast<int>(k);
  result.df = static_cast<int>(m * (k - 1));
  double ss = 0.0;
  for (const auto& folds : per_group_fold_tprs) {
    const double mean = std::accumulate(folds.begin(), folds.end(), 0.0) / static_cast<double>(k);
    result.means.push_back(mean);
    for (double v : folds) ss += (v - mean) * (v - mean);
  }
  result.ms_within = ss / result.df;
  result.q_critical = StudentizedRangeQuantile(1.0 - alpha, result.groups, result.df);
  const double se = std::sqrt(result.ms_within / static_cast<double>(k));
  result.pairwise_threshold = result.q_critical * se;
  result.half_widths.assign(m, result.q_critical / std::sqrt(2.0) * se);
  result.significant.assign(m, std::vector<bool>(m, false));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < m; ++j) {
      result.significant[i][j] =
          std::abs(result.means[i] - result.means[j]) > result.pairwise_threshold;
    }
  }
  return result;
}

}  // namespace fairaudit
