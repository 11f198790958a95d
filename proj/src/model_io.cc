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

#include <string>

#include "fairaudit/error.h"
#include "fairaudit/models.h"

namespace fairaudit {
namespace {

constexpr int kModelFormatVersion = 1;

}  // namespace

nlohmann::json ModelToJson(const TrainedModel& model) {
  nlohmann::json doc;
  doc["format"] = "fairaudit.model";
  doc["version"] = kModelFormatVersion;
  doc["feature_names"] = model.feature_names;
  doc["standardization"] = {{"mean", model.feature_mean}, {"scale", model.feature_scale}};
  doc["feature_sd"] = model.feature_sd;
  doc["converged"] = model.converged;
  doc["iterations"] = model.iterations;
  if (const auto* lr = std::get_if<LogisticParams>(&model.params)) {
    doc["kind"] = "logistic";
    doc["parameters"] = {{"intercept", lr->intercept}, {"coefficients", lr->coefficients}};
    return doc;
  }
  const auto& gbt = std::get<GbtParams>(model.params);
  doc["kind"] = "gbt";
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& tree : gbt.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
      if (n.feature < 0) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"gain", n.gain}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  doc["parameters"] = {{"base_margin", gbt.base_margin}, {"trees", std::move(trees)}};
  return doc;
}

TrainedModel ModelFromJson(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "fairaudit.model" || doc.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kConfigInvalid, "unsupported model document");
    }
    TrainedModel model;
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.feature_mean = doc.at("standardization").at("mean").get<std::vector<double>>();
    model.feature_scale = doc.at("standardization").at("scale").get<std::vector<double>>();
    model.feature_sd = doc.at("feature_sd").get<std::vector<double>>();
    model.converged = doc.at("converged").get<bool>();
    model.iterations = doc.at("iterations").get<int>();
    const auto& params = doc.at("parameters");
    if (doc.at("kind") == "logistic") {
      model.params = LogisticParams{params.at("intercept").get<double>(),
                                    params.at("coefficients").get<std::vector<double>>()};
      return model;
    }
    GbtParams gbt;
    gbt.base_margin = params.at("base_margin").get<double>();
    for (const auto& nodes : params.at("trees")) {
      Tree tree;
      for (const auto& n : nodes) {
        TreeNode node;
        if (n.contains("feature")) {
          node.feature = n.at("feature").get<int>();
          node.threshold = n.at("threshold").get<double>();
          node.left = n.at("left").get<int>();
          node.right = n.at("right").get<int>();
          node.gain = n.at("gain").get<double>();
        } else {
          node.value = n.at("value").get<double>();
        }
        tree.nodes.push_back(node);
      }
      gbt.trees.push_back(std::move(tree));
    }
    model.params = std::move(gbt);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("model document: ") + e.what());
  }
}

nlohmann::json ConfigToJson(const ModelConfig& config) {
  if (const auto* lr = std::get_if<LogisticConfig>(&config)) {
    return {{"kind", "logistic"},
            {"l2_strength", lr->l2_strength},
            {"max_iterations", lr->max_iterations},
            {"tolerance", lr->tolerance},
            {"standardize", lr->standardize}};
  }
  const auto& g = std::get<GbtConfig>(config);
  return {{"kind", "gbt"},
          {"rounds", g.rounds},
          {"max_depth", g.max_depth},
          {"learning_rate", g.learning_rate},
          {"min_child_weight", g.min_child_weight},
          {"subsample", g.subsample},
          {"subsample_seed", g.subsample_seed},
          {"reg_lambda", g.reg_lambda}};
}

ModelConfig ConfigFromJson(const nlohmann::json& doc) {
  try {
    const std::string kind = doc.value("kind", std::string("logistic"));
    if (kind == "logistic") {
      LogisticConfig cfg;
      cfg.l2_strength = doc.value("l2_strength", cfg.l2_strength);
      cfg.max_iterations = doc.value("max_iterations", cfg.max_iterations);
      cfg.tolerance = doc.value("tolerance", cfg.tolerance);
      cfg.standardize = doc.value("standardize", cfg.standardize);
      cfg.Validate();
      return cfg;
    }
    if (kind == "gbt") {
      GbtConfig cfg;
      cfg.rounds = doc.value("rounds", cfg.rounds);
      cfg.max_depth = doc.value("max_depth", cfg.max_depth);
      cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
      cfg.min_child_weight = doc.value("min_child_weight", cfg.min_child_weight);
      cfg.subsample = doc.value("subsample", cfg.subsample);
      cfg.subsample_seed = doc.value("subsample_seed", cfg.subsample_seed);
      cfg.reg_lambda = doc.value("reg_lambda", cfg.reg_lambda);
      cfg.Validate();
      return cfg;
    }
    throw Error(ErrorCode::kConfigInvalid, "unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("model config: ") + e.what());
  }
}

}  // namespace fairaudit
