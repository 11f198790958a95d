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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fairaudit/harness.h"
#include "fairaudit/metrics.h"
#include "fairaudit/mitigation.h"
#include "fairaudit/models.h"
#include "fairaudit/rng.h"
#include "fairaudit/synth.h"

namespace fa = fairaudit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

// --- 1. Reweighing ------------------------------------------------------

Outcome ReweighClosedForm() {
  const auto start = Clock::now();
  fa::Rng rng(101);
  double formula_err = 0, factor_err = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.Below(3));
    const size_t n = 4 * m + rng.Below(500 - 4 * m + 1);
    std::vector<int> g(n);
    std::vector<uint8_t> y(n);
    for (size_t i = 0; i < n; ++i) {
      // Leading rows seed every (group, label) cell.
      g[i] = i < static_cast<size_t>(2 * m) ? static_cast<int>(i / 2) : static_cast<int>(rng.Below(m));
      y[i] = i < static_cast<size_t>(2 * m) ? i % 2 : rng.Uniform() < 0.15 + 0.2 * g[i];
    }
    const std::vector<double> w = fa::Reweigh(g, y);
    std::map<int, double> n_group, n_label;
    std::map<std::pair<int, int>, double> n_cell;
    for (size_t i = 0; i < n; ++i) {
      n_group[g[i]] += 1;
      n_label[y[i]] += 1;
      n_cell[{g[i], y[i]}] += 1;
    }
    const double total = static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      const double expected = (n_group[g[i]] / total) * (n_label[y[i]] / total) /
                              (n_cell[{g[i], y[i]}] / total);
      formula_err = std::max(formula_err, std::abs(w[i] - expected));
    }
    double mass = 0;
    std::map<int, double> w_group, w_label;
    std::map<std::pair<int, int>, double> w_cell;
    for (size_t i = 0; i < n; ++i) {
      mass += w[i];
      w_group[g[i]] += w[i];
      w_label[y[i]] += w[i];
      w_cell[{g[i], y[i]}] += w[i];
    }
    for (const auto& [cell, v] : w_cell) {
      factor_err = std::max(factor_err, std::abs(v / mass - (w_group[cell.first] / mass) *
                                                              (w_label[cell.second] / mass)));
    }
  }
  const double t = Seconds(start);
  return {formula_err <= 1e-12 && factor_err <= 1e-9 && t < 5.0,
          Fmt("200 cohorts: max |w - formula| = %.2e (<= 1e-12), max factorization error = "
              "%.2e (<= 1e-9), %.2f s (< 5 s)",
              formula_err, factor_err, t)};
}

// --- 2. PSTA optimality ---------------------------------------------------

Outcome PstaOptimality() {
  const auto start = Clock::now();
  fa::Rng rng(202);
  const std::vector<double> grid = fa::ThresholdGrid(0.01);
  int mismatched = 0, tie_cases = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const size_t n = 4 + rng.Below(297);
    std::vector<double> p(n);
    std::vector<uint8_t> y(n);
    std::vector<int> g(n);
    const bool coarse = trial % 2 == 0;
    for (size_t i = 0; i < n; ++i) {
      g[i] = i < 4 ? static_cast<int>(i / 2) : static_cast<int>(rng.Below(2));
      y[i] = i < 4 ? 1 : rng.Uniform() < 0.35;
      const double u = rng.Uniform() * (g[i] ? 0.75 : 1.0);
      p[i] = coarse ? std::round(u * 40.0) / 40.0 : u;
    }
    fa::PstaOptions options;
    options.unprivileged = std::vector<int>{1};
    const fa::ThresholdPolicy policy = fa::PstaFit(p, y, g, options);

    // Exhaustive oracle on integer counts: |tp_u/P_u - hits/P| scaled by P*P_u.
    long positives = 0, hits = 0, positives_u = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!y[i]) continue;
      ++positives;
      hits += p[i] >= 0.5;
      positives_u += g[i] == 1;
    }
    std::vector<long> gaps;
    for (double t : grid) {
      long tp = 0;
      for (size_t i = 0; i < n; ++i) tp += y[i] && g[i] == 1 && p[i] >= t;
      gaps.push_back(std::labs(tp * positives - hits * positives_u));
    }
    const long best = *std::min_element(gaps.begin(), gaps.end());
    double largest = -1;
    int minimizers = 0;
    for (size_t k = 0; k < grid.size(); ++k) {
      if (gaps[k] == best) {
        largest = grid[k];
        ++minimizers;
      }
    }
    tie_cases += minimizers > 1;
    mismatched += policy.thresholds.at(1) != largest;
  }
  const double t = Seconds(start);
  return {mismatched == 0 && t < 10.0,
          Fmt("500 sets: %d mismatches against the exhaustive grid (%d with tied minimizers), "
              "%.2f s (< 10 s)",
              mismatched, tie_cases, t)};
}

// --- 3. DIR ---------------------------------------------------------------

std::vector<double> ColumnOf(const fa::Cohort& c, std::string_view name) {
  const auto v = c.values(c.ColumnIndex(name));
  return {v.begin(), v.end()};
}

Outcome DirRepairLevels() {
  fa::Rng rng(303);
  int multiset_failures = 0;
  double identity_err = 0, midpoint_err = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const size_t half = 2 + rng.Below(100);
    const int features = 1 + static_cast<int>(rng.Below(3));
    fa::Schema schema{{"g", fa::ColumnKind::kCategorical, fa::ColumnRole::kProtected, {"a", "b"}}};
    std::vector<std::vector<double>> values(1, std::vector<double>(2 * half));
    for (size_t i = 0; i < 2 * half; ++i) values[0][i] = static_cast<double>(i % 2);
    for (int f = 0; f < features; ++f) {
      schema.push_back({"f" + std::to_string(f), fa::ColumnKind::kNumeric, fa::ColumnRole::kFeature, {}});
      std::vector<double> col(2 * half);
      for (size_t i = 0; i < col.size(); ++i) {
        col[i] = (i % 2 ? 3.0 : 0.0) + (i % 2 ? 2.5 : 1.0) * rng.Normal();
      }
      values.push_back(col);
    }
    schema.push_back({"y", fa::ColumnKind::kNumeric, fa::ColumnRole::kOutcome, {}});
    std::vector<double> y(2 * half);
    for (size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>((i / 2) % 2);
    values.push_back(y);
    const fa::Cohort cohort(schema, values, {});

    const fa::Cohort none = fa::DirRepair(cohort, "g", 0.0);
    const fa::Cohort full = fa::DirRepair(cohort, "g", 1.0);
    const fa::Cohort mid = fa::DirRepair(cohort, "g", 0.5);
    for (int f = 0; f < features; ++f) {
      const std::string name = "f" + std::to_string(f);
      const auto orig = ColumnOf(cohort, name), v0 = ColumnOf(none, name),
                 v1 = ColumnOf(full, name), vh = ColumnOf(mid, name);
      std::vector<double> a, b;
      for (size_t i = 0; i < orig.size(); ++i) {
        (i % 2 ? b : a).push_back(v1[i]);
        identity_err = std::max(identity_err, std::abs(v0[i] - orig[i]));
        midpoint_err = std::max(midpoint_err, std::abs(vh[i] - 0.5 * (orig[i] + v1[i])));
      }
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      multiset_failures += a != b;
    }
  }
  return {multiset_failures == 0 && identity_err <= 1e-12 && midpoint_err <= 1e-12,
          Fmt("%d cohorts: %d full-repair multiset mismatches (exact), identity error %.2e, "
              "midpoint error %.2e (<= 1e-12)",
              trials, multiset_failures, identity_err, midpoint_err)};
}

// --- 4. CPP ---------------------------------------------------------------

Outcome CppEqualization() {
  fa::Rng rng(404);
  double analytic_err = 0;
  int unreachable = 0, rejected = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int m = 0;
    std::vector<double> p;
    std::vector<uint8_t> y;
    std::vector<int> g;
    std::vector<double> miss, pos, count;
    // Rejection sampling: keep instances where every group can reach the
    // largest generalized FNR, i.e. max gFNR <= 1 - base rate of each group.
    for (bool feasible = false; !feasible;) {
      m = 2 + static_cast<int>(rng.Below(3));
      const size_t n = 20 + rng.Below(400);
      p.assign(n, 0);
      y.assign(n, 0);
      g.assign(n, 0);
      for (size_t i = 0; i < n; ++i) {
        g[i] = i < static_cast<size_t>(2 * m) ? static_cast<int>(i / 2) : static_cast<int>(rng.Below(m));
        y[i] = i < static_cast<size_t>(2 * m) ? i % 2 : rng.Uniform() < 0.1 + 0.1 * g[i];
        p[i] = y[i] ? std::clamp(0.75 - 0.1 * g[i] + 0.15 * rng.Normal(), 0.0, 1.0)
                    : std::clamp(0.3 + 0.2 * rng.Normal(), 0.0, 1.0);
      }
      miss.assign(m, 0);
      pos.assign(m, 0);
      count.assign(m, 0);
      for (size_t i = 0; i < n; ++i) {
        count[g[i]] += 1;
        if (y[i]) {
          pos[g[i]] += 1;
          miss[g[i]] += 1.0 - p[i];
        }
      }
      double target = 0;
      for (int k = 0; k < m; ++k) target = std::max(target, miss[k] / pos[k]);
      feasible = true;
      for (int k = 0; k < m; ++k) feasible = feasible && target <= 1.0 - pos[k] / count[k];
      rejected += !feasible;
    }
    const fa::CppPolicy policy = fa::CppFit(p, y, g, 9);
    // Independent recomputation of each group's post-mixing generalized FNR.
    std::vector<double> mixed(m);
    for (int k = 0; k < m; ++k) {
      unreachable += !policy.groups.at(k).reachable;
      const double alpha = policy.groups.at(k).mix_rate;
      mixed[k] = (1 - alpha) * miss[k] / pos[k] + alpha * (1 - pos[k] / count[k]);
    }
    const auto [lo, hi] = std::minmax_element(mixed.begin(), mixed.end());
    analytic_err = std::max(analytic_err, *hi - *lo);
  }

  // Monte Carlo: tile one disadvantaged group's positives to 1e6 rows.
  const size_t half = 200;
  std::vector<double> p;
  std::vector<uint8_t> y;
  std::vector<int> g;
  fa::Rng data_rng(405);
  for (int k = 0; k < 2; ++k) {
    for (size_t i = 0; i < half; ++i) {
      g.push_back(k);
      y.push_back(i % 3 == 0);
      p.push_back(y.back() ? std::clamp(0.75 - 0.25 * k + 0.1 * data_rng.Normal(), 0.0, 1.0)
                           : 0.25);
    }
  }
  const fa::CppPolicy policy = fa::CppFit(p, y, g, 20260101);
  int mixed_group = policy.groups.at(0).mix_rate > 0 ? 0 : 1;
  std::vector<double> positives;
  for (size_t i = 0; i < p.size(); ++i) {
    if (y[i] && g[i] == mixed_group) positives.push_back(p[i]);
  }
  const size_t draws = 1000000;
  std::vector<double> tiled(draws);
  for (size_t i = 0; i < draws; ++i) tiled[i] = positives[i % positives.size()];
  const std::vector<int> groups(draws, mixed_group);
  const std::vector<double> out = fa::CppApply(policy, tiled, groups);
  double empirical = 0;
  for (double v : out) empirical += (1.0 - v) / draws;
  const double target = policy.groups.at(mixed_group).equalized_fnr;
  const double mc_err = std::abs(empirical - target);
  return {unreachable == 0 && analytic_err <= 1e-9 && mc_err <= 1e-3,
          Fmt("200 feasible fits (%d draws rejected, %d flagged unreachable): max generalized FNR spread %.2e "
              "(<= 1e-9); 1e6 draws at mix rate %.4f: |empirical - analytic| = %.2e (<= 1e-3)",
              rejected, unreachable, analytic_err, policy.groups.at(mixed_group).mix_rate, mc_err)};
}

// --- 5 and 6. Bias emergence and mitigation -------------------------------

fa::ExperimentConfig BiasedConfig() {
  fa::ExperimentConfig config;
  fa::CohortSpec spec;
  spec.n = 20000;
  spec.groups = {{"A", 0.5, 0.10}, {"B", 0.5, 0.04}};
  spec.proxy_strength = 0.5;
  spec.seed = 7;
  config.data.synthetic = spec;
  config.model_kind = fa::ModelKind::kLogistic;
  config.k_outer = 10;
  config.k_inner = 3;
  config.seed = 1;
  config.protected_attributes = {"group"};
  config.fixed_clock = true;
  return config;
}

Outcome BiasEmergence() {
  const auto start = Clock::now();
  const fa::ExperimentReport report = fa::RunExperiment(BiasedConfig());
  const double t = Seconds(start);
  const fa::CellReport* base = report.Find("group", fa::kBaseMethod);
  if (!base || !base->ok) return {false, "base cell failed"};
  const bool pass = base->fairness.eod < -0.1 && !base->fairness.fair &&
                    base->fairness.unprivileged == "B" && t < 60.0;
  return {pass, Fmt("n=20000, k=10: base EOD = %+.4f (< -0.1, unprivileged %s), flagged %s, "
                    "%.1f s (< 60 s)",
                    base->fairness.eod, base->fairness.unprivileged.c_str(),
                    base->fairness.fair ? "fair" : "unfair", t)};
}

Outcome MitigationReproduction() {
  const auto start = Clock::now();
  fa::ExperimentConfig config = BiasedConfig();
  for (fa::MitigationMethod m : {fa::MitigationMethod::kSup, fa::MitigationMethod::kRw,
                                 fa::MitigationMethod::kDir, fa::MitigationMethod::kPsta}) {
    fa::MitigationSpec spec;
    spec.method = m;
    config.mitigations.push_back(spec);
  }
  const fa::ExperimentReport report = fa::RunExperiment(config);
  const double t = Seconds(start);
  const fa::CellReport* base = report.Find("group", fa::kBaseMethod);
  if (!base || !base->ok) return {false, "base cell failed"};
  bool pass = t < 300.0;
  std::string detail;
  for (const char* method : {"RW", "DIR", "PSTA"}) {
    const fa::CellReport* c = report.Find("group", method);
    if (!c || !c->ok) {
      pass = false;
      detail += Fmt("%s failed; ", method);
      continue;
    }
    const double drop = base->report.bacc_mean - c->report.bacc_mean;
    const bool ok = std::abs(c->fairness.eod) <= 0.1 && drop <= 0.02;
    pass = pass && ok;
    detail += Fmt("%s EOD %+.4f dBAcc %+.4f; ", method, c->fairness.eod, -drop);
  }
  const fa::CellReport* sup = report.Find("group", "SUP");
  const bool sup_ok = sup && sup->ok && std::abs(sup->fairness.eod) < std::abs(base->fairness.eod);
  pass = pass && sup_ok;
  if (sup && sup->ok) detail += Fmt("SUP EOD %+.4f vs base %+.4f; ", sup->fairness.eod, base->fairness.eod);
  detail += Fmt("%.1f s (< 300 s)", t);
  return {pass, detail};
}

// --- 7. Gradient ------------------------------------------------------------

Outcome GradientCheck() {
  fa::Rng rng(707);
  double worst = 0;
  for (int dataset = 0; dataset < 10; ++dataset) {
    const size_t n = 50 + rng.Below(200);
    const size_t d = 1 + rng.Below(6);
    fa::Matrix x(n, d);
    std::vector<uint8_t> y(n);
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) {
      double z = 0;
      for (size_t j = 0; j < d; ++j) {
        x(i, j) = rng.Normal() * (1.0 + j);
        z += x(i, j) * (j % 2 ? -0.5 : 0.7);
      }
      y[i] = rng.Uniform() < 1.0 / (1.0 + std::exp(-z));
      w[i] = 0.25 + rng.Uniform();
    }
    const double l2 = dataset % 2 ? 0.0 : 0.1 * (1 + dataset);
    const fa::LogisticObjective objective(x, y, w, l2);
    for (int point = 0; point < 5; ++point) {
      std::vector<double> beta(objective.dimension());
      for (double& b : beta) b = 0.5 * rng.Normal();
      const std::vector<double> g = objective.Gradient(beta);
      double diff = 0, scale = 0;
      for (size_t j = 0; j < beta.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(beta[j]));
        std::vector<double> up = beta, down = beta;
        up[j] += h;
        down[j] -= h;
        const double fd = (objective.Value(up) - objective.Value(down)) / (2 * h);
        diff += (fd - g[j]) * (fd - g[j]);
        scale = std::max(scale, std::max(g[j] * g[j], fd * fd));
      }
      worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12));
    }
  }
  return {worst <= 1e-6, Fmt("10 datasets x 5 points: max relative error %.2e (<= 1e-6)", worst)};
}

// --- 8. AUC -------------------------------------------------------------------

Outcome AucOracle() {
  fa::Rng rng(808);
  int mismatches = 0, with_ties = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + rng.Below(49);
    std::vector<double> p(n);
    std::vector<uint8_t> y(n);
    for (size_t i = 0; i < n; ++i) {
      p[i] = trial % 2 ? static_cast<double>(rng.Below(6)) / 5.0 : rng.Uniform();
      y[i] = i == 0 ? 1 : i == 1 ? 0 : rng.Uniform() < 0.45;
    }
    double pairs = 0, credit = 0;
    bool tied = false;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (!y[i] || y[j]) continue;
        pairs += 1;
        credit += p[i] > p[j] ? 1.0 : p[i] == p[j] ? 0.5 : 0.0;
        tied = tied || p[i] == p[j];
      }
    }
    with_ties += tied;
    mismatches += fa::AucRoc(p, y) != credit / pairs;
  }
  return {mismatches == 0, Fmt("100 instances (%d with tied pairs): %d inexact results", with_ties,
                               mismatches)};
}

// --- 9. Tukey ------------------------------------------------------------------

Outcome TukeyCalibration() {
  const auto start = Clock::now();
  const fa::TukeyResult exact = fa::TukeyTprTest({std::vector<double>(10, 0.5), std::vector<double>(10, 0.6)}, 0.05);
  const double reference = std::sqrt(2.0) * fa::StudentTQuantile(0.975, 18);
  const double q_err = std::abs(exact.q_critical - reference);
  fa::Rng rng(909);
  const int reps = 2000;
  int rejections = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::vector<double>> groups(2, std::vector<double>(10));
    for (auto& fold_values : groups) {
      for (double& v : fold_values) v = 0.7 + 0.05 * rng.Normal();
    }
    rejections += fa::TukeyTprTest(groups, 0.05).significant[0][1];
  }
  const double fwer = rejections / static_cast<double>(reps);
  const double t = Seconds(start);
  return {q_err <= 1e-6 && std::abs(fwer - 0.05) <= 0.02 && t < 60.0,
          Fmt("q(0.95; 2, 18) = %.9f vs sqrt2 t = %.9f (|diff| %.1e <= 1e-6); null FWER "
              "%.4f over %d reps (0.05 +- 0.02); %.1f s (< 60 s)",
              exact.q_critical, reference, q_err, fwer, reps, t)};
}

// --- 10. Determinism --------------------------------------------------------------

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int Shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome Determinism(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream cfg(work / "config.json");
    cfg << R"({"data": {"synthetic": {"n": 5000, "seed": 3, "proxy_strength": 0.5,
               "groups": [{"label": "A", "proportion": 0.5, "prevalence": 0.1},
                          {"label": "B", "proportion": 0.5, "prevalence": 0.04}]}},
               "cv": {"k_outer": 10, "k_inner": 3, "seed": 5},
               "protected": ["group"],
               "mitigations": ["SUP", "RW", "DIR", "CPP", "PSTA"]})";
  }
  const std::string cli = FAIRAUDIT_CLI;
  const std::string args = " mitigate --fixed-clock --config " + (work / "config.json").string() + " --out ";
  // Different thread counts must not change a byte.
  const int a = Shell("OMP_NUM_THREADS=1 " + cli + args + (work / "run1").string() + " > /dev/null");
  const int b = Shell("OMP_NUM_THREADS=3 " + cli + args + (work / "run2").string() + " > /dev/null");
  if (a != 0 || b != 0) return {false, Fmt("mitigate exit codes %d and %d", a, b)};
  int files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(work / "run1")) {
    const std::string ext = entry.path().extension().string();
    if (ext != ".json" && ext != ".svg") continue;
    ++files;
    const fs::path other = work / "run2" / entry.path().filename();
    differing += !fs::exists(other) || Slurp(entry.path()) != Slurp(other);
  }
  fs::remove_all(work);
  return {files >= 7 && differing == 0,
          Fmt("two mitigate runs (1 and 3 threads): %d JSON/SVG files compared, %d differ", files,
              differing)};
}

// --- 11. No leakage --------------------------------------------------------------

Outcome NoLeakage() {
  fa::ExperimentConfig config;
  fa::CohortSpec spec;
  spec.n = 3000;
  spec.groups = {{"A", 0.5, 0.10}, {"B", 0.5, 0.04}};
  spec.proxy_strength = 0.5;
  spec.seed = 11;
  config.data.synthetic = spec;
  config.k_outer = 5;
  config.k_inner = 3;
  config.seed = 2;
  config.protected_attributes = {"group"};
  for (fa::MitigationMethod m : {fa::MitigationMethod::kSup, fa::MitigationMethod::kRw,
                                 fa::MitigationMethod::kDir, fa::MitigationMethod::kCpp,
                                 fa::MitigationMethod::kPsta}) {
    fa::MitigationSpec mitigation;
    mitigation.method = m;
    mitigation.seed = 31;
    config.mitigations.push_back(mitigation);
  }
  const fa::Cohort cohort = fa::LoadCohort(config);
  const fa::NestedPlan plan = fa::NestedFolds(cohort, config.k_outer, config.k_inner, config.seed);
  const auto& levels = cohort.schema()[0].levels;
  int compared = 0, changed = 0;
  for (int fold = 0; fold < config.k_outer; ++fold) {
    std::vector<uint8_t> labels = cohort.outcome();
    for (size_t r : plan.outer.TestRows(fold)) labels[r] = 1 - labels[r];
    const fa::Cohort corrupted = cohort.WithOutcome(labels);
    const fa::FoldFit clean = fa::FitFold(cohort, plan, fold, config);
    const fa::FoldFit dirty = fa::FitFold(corrupted, plan, fold, config);
    if (clean.methods.size() != dirty.methods.size()) return {false, "method lists differ"};
    for (size_t i = 0; i < clean.methods.size(); ++i) {
      if (!clean.methods[i].error.empty()) {
        return {false, "fit failed: " + clean.methods[i].error};
      }
      ++compared;
      changed += clean.methods[i].Fitted(levels).dump() != dirty.methods[i].Fitted(levels).dump();
    }
    ++compared;
    changed += clean.post_fit_scores != dirty.post_fit_scores;
  }
  return {changed == 0, Fmt("%d folds, %d fitted-state serializations compared bitwise, %d changed",
                            config.k_outer, compared, changed)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fairaudit_acceptance";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"reweighing closed form", ReweighClosedForm},
      {"threshold adjustment optimality", PstaOptimality},
      {"disparate impact repair levels", DirRepairLevels},
      {"calibrated post-processing equalization", CppEqualization},
      {"bias emergence on synthetic cohort", BiasEmergence},
      {"mitigation reproduction", MitigationReproduction},
      {"logistic gradient check", GradientCheck},
      {"AUC all-pairs oracle", AucOracle},
      {"Tukey calibration", TukeyCalibration},
      {"determinism", [&] { return Determinism(work); }},
      {"no-leakage sentinel", NoLeakage},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("%s [%zu] %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
