// Copyright 2026 The cmlmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmlmc/model_io.h"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cmlmc/errors.h"

namespace cmlmc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using forest_internal::Node;
using forest_internal::Tree;

constexpr const char* kFormat = "cmlmc-model";

ordered_json Header(const char* kind) {
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kModelFormatVersion;
  j["kind"] = kind;
  return j;
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
}

void CheckHeader(const json& j, const std::string& kind) {
  if (!j.is_object() || j.value("format", "") != kFormat) {
    throw SchemaError("not a cmlmc model document");
  }
  const int version = j.value("version", -1);
  if (version != kModelFormatVersion) {
    throw SchemaError("unsupported model format version " + std::to_string(version));
  }
  const std::string found = j.value("kind", "");
  if (found != kind) {
    throw SchemaError("model kind is '" + found + "', expected '" + kind + "'");
  }
}

std::vector<double> ToVector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd FromVector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

ordered_json ForestParamsJson(const ForestParams& p) {
  ordered_json j;
  j["n_trees"] = p.n_trees;
  j["mtry"] = p.mtry;
  j["min_leaf"] = p.min_leaf;
  j["build_fraction"] = p.build_fraction;
  j["estimate_fraction"] = p.estimate_fraction;
  j["seed"] = p.seed;
  j["n_threads"] = p.n_threads;
  return j;
}

ForestParams ForestParamsFrom(const json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.mtry = j.at("mtry").get<int>();
  p.min_leaf = j.at("min_leaf").get<int>();
  p.build_fraction = j.at("build_fraction").get<double>();
  p.estimate_fraction = j.at("estimate_fraction").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.n_threads = j.at("n_threads").get<int>();
  return p;
}

ordered_json TreeJson(const Tree& t) {
  ordered_json j;
  std::vector<int> var, left, right, leaf;
  std::vector<double> threshold;
  for (const Node& n : t.nodes) {
    var.push_back(n.var);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    leaf.push_back(n.leaf);
  }
  j["var"] = var;
  j["threshold"] = threshold;
  j["left"] = left;
  j["right"] = right;
  j["leaf"] = leaf;
  j["leaf_offsets"] = t.leaf_offsets;
  j["leaf_members"] = t.leaf_members;
  return j;
}

Tree TreeFrom(const json& j, Index n_features, Index n_train) {
  Tree t;
  const auto var = j.at("var").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto leaf = j.at("leaf").get<std::vector<int>>();
  t.leaf_offsets = j.at("leaf_offsets").get<std::vector<int>>();
  t.leaf_members = j.at("leaf_members").get<std::vector<int>>();
  const std::size_t n = var.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
      leaf.size() != n) {
    throw SchemaError("tree node arrays are empty or differ in length");
  }
  if (t.leaf_offsets.size() < 2 || t.leaf_offsets.front() != 0 ||
      t.leaf_offsets.back() != static_cast<int>(t.leaf_members.size())) {
    throw SchemaError("tree leaf offsets are inconsistent");
  }
  const int n_leaves = t.n_leaves();
  for (std::size_t l = 0; l + 1 < t.leaf_offsets.size(); ++l) {
    if (t.leaf_offsets[l] >= t.leaf_offsets[l + 1]) {
      throw SchemaError("tree has an empty or unordered leaf");
    }
  }
  for (int m : t.leaf_members) {
    if (m < 0 || m >= n_train) throw SchemaError("leaf member out of range");
  }
  const int nodes = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    Node node{var[i], threshold[i], left[i], right[i], leaf[i]};
    if (node.var == -1) {
      if (node.leaf < 0 || node.leaf >= n_leaves) throw SchemaError("leaf slot out of range");
    } else if (node.var < 0 || node.var >= n_features ||
               node.left <= static_cast<int>(i) || node.left >= nodes ||
               node.right <= static_cast<int>(i) || node.right >= nodes) {
      throw SchemaError("split node refers outside the tree");
    }
    t.nodes.push_back(node);
  }
  return t;
}

template <typename Fn>
auto Decode(const std::string& what, Fn fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw SchemaError(what + ": " + e.what());
  }
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot read model file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

// Friend of the model classes; reads and writes their private state.
struct ModelCodec {
  static std::string Encode(const ForestModel& m) {
    ordered_json j = Header(m.probability_ ? "probability_forest" : "regression_forest");
    j["params"] = ForestParamsJson(m.params_);
    j["n_features"] = m.n_features_;
    j["outcome"] = ToVector(m.outcome_);
    ordered_json trees = ordered_json::array();
    for (const auto& t : m.trees_) trees.push_back(TreeJson(t));
    j["trees"] = std::move(trees);
    return j.dump() + "\n";
  }

  static ForestModel DecodeForest(const std::string& text) {
    const json j = Parse(text);
    const bool probability = j.value("kind", "") == "probability_forest";
    CheckHeader(j, probability ? "probability_forest" : "regression_forest");
    return Decode("forest model", [&] {
      ForestModel m;
      m.probability_ = probability;
      m.params_ = ForestParamsFrom(j.at("params"));
      m.n_features_ = j.at("n_features").get<Index>();
      m.outcome_ = FromVector(j.at("outcome").get<std::vector<double>>());
      for (const auto& t : j.at("trees")) {
        m.trees_.push_back(TreeFrom(t, m.n_features_, m.outcome_.size()));
      }
      if (m.trees_.empty()) throw SchemaError("forest model has no trees");
      m.ComputeLeafMeans();
      return m;
    });
  }

  static std::string Encode(const CausalForestModel& m) {
    ordered_json j = Header("causal_forest");
    j["params"] = ForestParamsJson(m.params_);
    j["centering"] = m.centering_ == Centering::kLocal ? "local" : "none";
    j["n_features"] = m.n_features_;
    j["fit_outcome"] = ToVector(m.y_fit_);
    j["fit_treatment"] = ToVector(m.d_fit_);
    j["arm"] = ToVector(m.arm_);
    ordered_json trees = ordered_json::array();
    for (const auto& t : m.trees_) trees.push_back(TreeJson(t));
    j["trees"] = std::move(trees);
    return j.dump() + "\n";
  }

  static CausalForestModel DecodeCausal(const std::string& text) {
    const json j = Parse(text);
    CheckHeader(j, "causal_forest");
    return Decode("causal forest model", [&] {
      CausalForestModel m;
      m.params_ = ForestParamsFrom(j.at("params"));
      const std::string centering = j.at("centering").get<std::string>();
      if (centering != "none" && centering != "local") {
        throw SchemaError("unknown centering '" + centering + "'");
      }
      m.centering_ = centering == "local" ? Centering::kLocal : Centering::kNone;
      m.n_features_ = j.at("n_features").get<Index>();
      m.y_fit_ = FromVector(j.at("fit_outcome").get<std::vector<double>>());
      m.d_fit_ = FromVector(j.at("fit_treatment").get<std::vector<double>>());
      m.arm_ = FromVector(j.at("arm").get<std::vector<double>>());
      if (m.y_fit_.size() != m.arm_.size() || m.d_fit_.size() != m.arm_.size()) {
        throw SchemaError("causal forest training vectors differ in length");
      }
      for (const auto& t : j.at("trees")) {
        m.trees_.push_back(TreeFrom(t, m.n_features_, m.arm_.size()));
      }
      if (m.trees_.empty()) throw SchemaError("causal forest model has no trees");
      m.ComputeLeafSums();
      return m;
    });
  }
};

std::string ModelToJson(const ForestModel& model) { return ModelCodec::Encode(model); }
std::string ModelToJson(const CausalForestModel& model) { return ModelCodec::Encode(model); }

std::string ModelToJson(const LassoModel& m) {
  ordered_json j = Header("lasso");
  const LassoParams& p = m.params;
  j["params"] = {{"lambda_grid", p.lambda_grid},
                 {"n_lambda", p.n_lambda},
                 {"lambda_min_ratio", p.lambda_min_ratio},
                 {"n_folds", p.n_folds},
                 {"max_iter", p.max_iter},
                 {"tol", p.tol},
                 {"standardize", p.standardize},
                 {"fit_intercept", p.fit_intercept},
                 {"seed", p.seed}};
  j["family"] = m.family == Family::kBinomial ? "binomial" : "gaussian";
  j["intercept"] = m.intercept;
  j["coefficients"] = ToVector(m.coefficients);
  j["lambda_selected"] = m.lambda_selected;
  j["lambda_grid"] = m.lambda_grid;
  j["cv_loss"] = m.cv_loss;
  return j.dump() + "\n";
}

ForestModel ForestFromJson(const std::string& text) { return ModelCodec::DecodeForest(text); }
CausalForestModel CausalForestFromJson(const std::string& text) {
  return ModelCodec::DecodeCausal(text);
}

LassoModel LassoFromJson(const std::string& text) {
  const json j = Parse(text);
  CheckHeader(j, "lasso");
  return Decode("lasso model", [&] {
    LassoModel m;
    const json& p = j.at("params");
    m.params.lambda_grid = p.at("lambda_grid").get<std::vector<double>>();
    m.params.n_lambda = p.at("n_lambda").get<int>();
    m.params.lambda_min_ratio = p.at("lambda_min_ratio").get<double>();
    m.params.n_folds = p.at("n_folds").get<int>();
    m.params.max_iter = p.at("max_iter").get<int>();
    m.params.tol = p.at("tol").get<double>();
    m.params.standardize = p.at("standardize").get<bool>();
    m.params.fit_intercept = p.at("fit_intercept").get<bool>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    const std::string family = j.at("family").get<std::string>();
    if (family != "gaussian" && family != "binomial") {
      throw SchemaError("unknown family '" + family + "'");
    }
    m.family = family == "binomial" ? Family::kBinomial : Family::kGaussian;
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = FromVector(j.at("coefficients").get<std::vector<double>>());
    m.lambda_selected = j.at("lambda_selected").get<double>();
    m.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
    m.cv_loss = j.at("cv_loss").get<std::vector<double>>();
    return m;
  });
}

void SaveModel(const ForestModel& model, const std::filesystem::path& path) {
  WriteText(path, ModelToJson(model));
}
void SaveModel(const CausalForestModel& model, const std::filesystem::path& path) {
  WriteText(path, ModelToJson(model));
}
void SaveModel(const LassoModel& model, const std::filesystem::path& path) {
  WriteText(path, ModelToJson(model));
}

ForestModel LoadForestModel(const std::filesystem::path& path) {
  return ForestFromJson(ReadText(path));
}
CausalForestModel LoadCausalForestModel(const std::filesystem::path& path) {
  return CausalForestFromJson(ReadText(path));
}
LassoModel LoadLassoModel(const std::filesystem::path& path) {
  return LassoFromJson(ReadText(path));
}

}  // namespace cmlmc
