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
#include <numeric>

#include <Eigen/Dense>

#include "fairaudit/error.h"
#include "fairaudit/kernels.h"
#include "fairaudit/models.h"
#include "model_internal.h"

namespace fairaudit {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> sd;
};

Standardization WeightedMoments(const Matrix& x, std::span<const double> w) {
  Standardization s;
  s.mean.assign(x.cols, 0.0);
  s.sd.assign(x.cols, 0.0);
  double total = 0.0;
  for (size_t r = 0; r < x.rows; ++r) {
    total += w[r];
    for (size_t j = 0; j < x.cols; ++j) s.mean[j] += w[r] * x(r, j);
  }
  for (double& m : s.mean) m /= total;
  for (size_t r = 0; r < x.rows; ++r) {
    for (size_t j = 0; j < x.cols; ++j) {
      const double d = x(r, j) - s.mean[j];
      s.sd[j] += w[r] * d * d;
    }
  }
  s.scale.resize(x.cols);
  for (size_t j = 0; j < x.cols; ++j) {
    s.sd[j] = std::sqrt(s.sd[j] / total);
    s.scale[j] = s.sd[j] > 1e-12 ? s.sd[j] : 1.0;
  }
  return s;
}

// Objective pieces on a fixed (already standardized) design.
struct Evaluation {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;
};

Evaluation Evaluate(const Matrix& x, std::span<const uint8_t> y, std::span<const double> w,
                    double total_weight, double l2, std::span<const double> beta,
                    bool with_hessian) {
  kernels::LogisticTerms terms = kernels::LogisticParallel(x, y, w, beta, with_hessian);
  const size_t d = beta.size();
  Evaluation e;
  e.value = terms.loss / total_weight;
  e.gradient = std::move(terms.gradient);
  for (double& g : e.gradient) g /= total_weight;
  for (size_t j = 1; j < d; ++j) {
    e.value += 0.5 * l2 * beta[j] * beta[j];
    e.gradient[j] += l2 * beta[j];
  }
  if (with_hessian) {
    e.hessian = std::move(terms.hessian);
    for (double& h : e.hessian) h /= total_weight;
    for (size_t j = 1; j < d; ++j) e.hessian[j * d + j] += l2;
  }
  return e;
}

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void LogisticConfig::Validate() const {
  if (!(l2_strength >= 0) || !std::isfinite(l2_strength)) {
    throw Error(ErrorCode::kConfigInvalid, "l2_strength must be finite and >= 0");
  }
  if (max_iterations < 1) throw Error(ErrorCode::kConfigInvalid, "max_iterations must be >= 1");
  if (!(tolerance > 0)) throw Error(ErrorCode::kConfigInvalid, "tolerance must be > 0");
}

LogisticObjective::LogisticObjective(const Matrix& x, std::span<const uint8_t> y,
                                     std::span<const double> w, double l2_strength)
    : x_(x), y_(y), w_(w), l2_(l2_strength),
      total_weight_(std::accumulate(w.begin(), w.end(), 0.0)) {}

double LogisticObjective::Value(std::span<const double> beta) const {
  return Evaluate(x_, y_, w_, total_weight_, l2_, beta, false).value;
}

std::vector<double> LogisticObjective::Gradient(std::span<const double> beta) const {
  return Evaluate(x_, y_, w_, total_weight_, l2_, beta, false).gradient;
}

TrainedModel TrainLogistic(const Matrix& x, std::span<const uint8_t> y,
                           std::span<const double> w, const LogisticConfig& config) {
  config.Validate();
  internal::CheckTrainingInputs(x, y, w);

  const Standardization moments = WeightedMoments(x, w);
  Matrix design = x;
  if (config.standardize) {
    for (size_t r = 0; r < design.rows; ++r) {
      for (size_t j = 0; j < design.cols; ++j) {
        design(r, j) = (design(r, j) - moments.mean[j]) / moments.scale[j];
      }
    }
  }
  const double total_weight = std::accumulate(w.begin(), w.end(), 0.0);
  const size_t d = x.cols + 1;
  std::vector<double> beta(d, 0.0), trial(d);

  TrainedModel model;
  model.feature_names = x.names;
  model.feature_sd = moments.sd;
  if (config.standardize) {
    model.feature_mean = moments.mean;
    model.feature_scale = moments.scale;
  }
  model.converged = false;

  Evaluation current = Evaluate(design, y, w, total_weight, config.l2_strength, beta, true);
  model.loss_trace.push_back(current.value);
  int iteration = 0;
  for (; iteration < config.max_iterations; ++iteration) {
    if (MaxAbs(current.gradient) <= config.tolerance) {
      model.converged = true;
      break;
    }
    Eigen::Map<const Eigen::MatrixXd> hessian(current.hessian.data(), static_cast<Eigen::Index>(d),
                                              static_cast<Eigen::Index>(d));
    Eigen::Map<const Eigen::VectorXd> gradient(current.gradient.data(),
                                               static_cast<Eigen::Index>(d));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd step = ldlt.solve(-gradient);
    const bool newton_ok = ldlt.info() == Eigen::Success && step.allFinite() &&
                           gradient.dot(step) < 0;

    // Backtracking on the Newton direction, then on steepest descent.
    bool accepted = false;
    for (int attempt = newton_ok ? 0 : 1; attempt < 2 && !accepted; ++attempt) {
      const Eigen::VectorXd direction = attempt == 0 ? step : Eigen::VectorXd(-gradient);
      const double slope = gradient.dot(direction);
      double t = 1.0;
      for (int h = 0; h < kMaxHalvings; ++h, t *= 0.5) {
        for (size_t j = 0; j < d; ++j) trial[j] = beta[j] + t * direction[static_cast<Eigen::Index>(j)];
        const double value =
            Evaluate(design, y, w, total_weight, config.l2_strength, trial, false).value;
        if (std::isfinite(value) && value <= current.value + kArmijo * t * slope) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    beta = trial;
    current = Evaluate(design, y, w, total_weight, config.l2_strength, beta, true);
    model.loss_trace.push_back(current.value);
  }
  if (!model.converged && MaxAbs(current.gradient) <= config.tolerance) model.converged = true;
  model.iterations = iteration;
  model.params = LogisticParams{beta[0], std::vector<double>(beta.begin() + 1, beta.end())};
  return model;
}

}  // namespace fairaudit
