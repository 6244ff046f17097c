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
#include <algorithm>
#include <string>

#include "cmlmc/causal.h"
#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {

const char* MethodName(Method m) {
  switch (m) {
    case Method::kInfeasible: return "infeasible";
    case Method::kCmr: return "cmr";
    case Method::kMomIpw: return "mom_ipw";
    case Method::kMomDr: return "mom_dr";
    case Method::kMcm: return "mcm";
    case Method::kMcmEa: return "mcm_ea";
    case Method::kRlearn: return "rlearn";
    case Method::kCf: return "cf";
    case Method::kCfLc: return "cf_lc";
  }
  return "?";
}

const char* LearnerName(Learner l) {
  return l == Learner::kForest ? "forest" : "lasso";
}

Method ParseMethod(const std::string& text) {
  for (Method m : {Method::kInfeasible, Method::kCmr, Method::kMomIpw,
                   Method::kMomDr, Method::kMcm, Method::kMcmEa,
                   Method::kRlearn, Method::kCf, Method::kCfLc}) {
    if (text == MethodName(m)) return m;
  }
  throw ArgumentError("unknown method '" + text + "'");
}

Learner ParseLearner(const std::string& text) {
  if (text == "forest") return Learner::kForest;
  if (text == "lasso") return Learner::kLasso;
  throw ArgumentError("unknown learner '" + text + "'");
}

std::string EstimatorSpec::Id() const {
  return std::string(MethodName(method)) + ":" + LearnerName(learner);
}

EstimatorSpec EstimatorSpec::Parse(const std::string& id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) {
    throw ArgumentError("estimator '" + id + "' is not of the form method:learner");
  }
  EstimatorSpec spec;
  spec.method = ParseMethod(id.substr(0, colon));
  spec.learner = ParseLearner(id.substr(colon + 1));
  spec.Validate();
  return spec;
}

void EstimatorSpec::Validate() const {
  switch (method) {
    case Method::kMcm:
    case Method::kMcmEa:
    case Method::kRlearn:
      if (learner != Learner::kLasso) {
        throw ArgumentError(Id() + ": this method needs the lasso learner");
      }
      break;
    case Method::kCf:
    case Method::kCfLc:
      if (learner != Learner::kForest) {
        throw ArgumentError(Id() + ": causal forests need the forest learner");
      }
      break;
    default:
      break;
  }
}

bool EstimatorSpec::cross_fit() const {
  switch (method) {
    case Method::kInfeasible:
    case Method::kCmr:
    case Method::kCf:
      return false;
    default:
      return true;
  }
}

std::vector<EstimatorSpec> AllEstimators() {
  return {
      {Method::kInfeasible, Learner::kForest},
      {Method::kInfeasible, Learner::kLasso},
      {Method::kCmr, Learner::kForest},
      {Method::kCmr, Learner::kLasso},
      {Method::kMomIpw, Learner::kForest},
      {Method::kMomIpw, Learner::kLasso},
      {Method::kMomDr, Learner::kForest},
      {Method::kMomDr, Learner::kLasso},
      {Method::kMcm, Learner::kLasso},
      {Method::kMcmEa, Learner::kLasso},
      {Method::kRlearn, Learner::kLasso},
      {Method::kCf, Learner::kForest},
      {Method::kCfLc, Learner::kForest},
  };
}

unsigned RequiredNuisances(Method m) {
  switch (m) {
    case Method::kMomIpw:
    case Method::kMcm:
      return kNuisanceP;
    case Method::kMomDr:
      return kNuisanceP | kNuisanceMu1 | kNuisanceMu0;
    case Method::kMcmEa:
    case Method::kRlearn:
    case Method::kCfLc:
      return kNuisanceP | kNuisanceMu;
    default:
      return 0;
  }
}

namespace {

Eigen::MatrixXd Rows(const Eigen::MatrixXd& x, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Index>(r)) = x.row(rows[r]);
  }
  return out;
}

Eigen::VectorXd Rows(const Eigen::VectorXd& v, const std::vector<Index>& rows) {
  Eigen::VectorXd out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out[static_cast<Index>(r)] = v[rows[r]];
  }
  return out;
}

// Smallest sample a learner can be fitted on.
Index MinimumRows(const LearnerConfig& config) {
  return config.learner == Learner::kForest
             ? 4
             : static_cast<Index>(config.lasso.n_folds);
}

// Fits one nuisance component on rows and predicts targets.
Eigen::VectorXd FitPredict(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<Index>& rows,
                           const std::vector<Index>& targets,
                           const LearnerConfig& config, bool binary,
                           std::uint64_t seed) {
  const Eigen::MatrixXd xf = Rows(x, rows);
  const Eigen::VectorXd yf = Rows(y, rows);
  const Eigen::MatrixXd xt = Rows(x, targets);
  if (config.learner == Learner::kForest) {
    std::vector<std::uint64_t> ids(rows.begin(), rows.end());
    ForestParams params = config.forest;
    params.seed = seed;
    const ForestModel model = binary ? FitProbabilityForest(xf, yf, params, ids)
                                     : FitRegressionForest(xf, yf, params, ids);
    return model.PredictAll(xt);
  }
  LassoParams params = config.lasso;
  params.seed = seed;
  const LassoModel model =
      binary ? FitLogisticLasso(xf, yf, params)
             : FitLasso(xf, yf, Eigen::VectorXd::Ones(xf.rows()), params);
  return model.Predict(xt);
}

}  // namespace

Nuisances EstimateNuisances(const Sample& sample, const Eigen::MatrixXd& x,
                            const LearnerConfig& config, unsigned mask,
                            const SplitPlan& plan, std::uint64_t seed) {
  sample.Validate();
  const Index n = sample.size();
  if (x.rows() != n) throw ArgumentError("design rows do not match the sample");
  if (plan.size() != n || plan.n_folds != 2) {
    throw ArgumentError("nuisance estimation needs a two-fold plan over the sample");
  }
  Nuisances out;
  out.plan = plan;
  out.available = mask;
  out.predicted_by.resize(n);
  for (Index i = 0; i < n; ++i) out.predicted_by[i] = 1 - plan.fold[i];
  if (mask & kNuisanceP) out.p_hat.resize(n);
  if (mask & kNuisanceMu) out.mu_hat.resize(n);
  if (mask & kNuisanceMu1) out.mu1_hat.resize(n);
  if (mask & kNuisanceMu0) out.mu0_hat.resize(n);

  const Index min_rows = MinimumRows(config);
  for (int h = 0; h < 2; ++h) {
    const auto fit_rows = plan.Members(h);
    const auto targets = plan.Members(1 - h);
    if (fit_rows.empty() || targets.empty()) {
      throw EstimationError("a cross-fitting half is empty");
    }
    // Keyed on the half's smallest unit so results do not depend on the
    // half's label.
    const std::uint64_t base =
        DeriveSeed(seed, SeedTag::kNuisance, static_cast<std::uint64_t>(fit_rows.front()));
    auto store = [&](Eigen::VectorXd& dest, const Eigen::VectorXd& pred) {
      for (std::size_t r = 0; r < targets.size(); ++r) {
        dest[targets[r]] = pred[static_cast<Index>(r)];
      }
    };
    if (mask & kNuisanceP) {
      const Eigen::VectorXd df = Rows(sample.treatment, fit_rows);
      const double share = df.mean();
      if (share == 0.0 || share == 1.0) {
        throw EstimationError("a cross-fitting half has only one treatment arm; "
                              "increase the sample size");
      }
      if (static_cast<Index>(fit_rows.size()) < min_rows) {
        throw EstimationError("a cross-fitting half is too small for the learner");
      }
      store(out.p_hat, FitPredict(x, sample.treatment, fit_rows, targets, config,
                                  true, DeriveSeed(base, SeedTag::kNuisance, 1)));
    }
    if (mask & kNuisanceMu) {
      if (static_cast<Index>(fit_rows.size()) < min_rows) {
        throw EstimationError("a cross-fitting half is too small for the learner");
      }
      store(out.mu_hat, FitPredict(x, sample.outcome, fit_rows, targets, config,
                                   false, DeriveSeed(base, SeedTag::kNuisance, 2)));
    }
    for (int arm = 1; arm >= 0; --arm) {
      const unsigned bit = arm == 1 ? kNuisanceMu1 : kNuisanceMu0;
      if (!(mask & bit)) continue;
      std::vector<Index> arm_rows;
      for (Index i : fit_rows) {
        if (sample.treatment[i] == static_cast<double>(arm)) arm_rows.push_back(i);
      }
      if (static_cast<Index>(arm_rows.size()) < min_rows) {
        throw EstimationError(std::string(arm == 1 ? "treated" : "control") +
                              " arm has " + std::to_string(arm_rows.size()) +
                              " units within a cross-fitting half; increase "
                              "the sample size");
      }
      store(arm == 1 ? out.mu1_hat : out.mu0_hat,
            FitPredict(x, sample.outcome, arm_rows, targets, config, false,
                       DeriveSeed(base, SeedTag::kNuisance, 3 + arm)));
    }
  }
  return out;
}

Nuisances EstimateNuisances(const Sample& sample, const LearnerConfig& config,
                            unsigned mask, std::uint64_t seed) {
  const SplitPlan plan =
      SplitHalf(sample.size(), DeriveSeed(seed, SeedTag::kHalfSplit, 0));
  if (config.learner == Learner::kForest) {
    return EstimateNuisances(sample, sample.data.x(), config, mask, plan, seed);
  }
  const auto expanded = ExpandFeatures(sample.data);
  return EstimateNuisances(sample, expanded.first.x(), config, mask, plan, seed);
}

ReplicationContext::ReplicationContext(const Sample& train,
                                       const Dataset& validation,
                                       std::uint64_t seed,
                                       LearnerConfig forest_config,
                                       LearnerConfig lasso_config,
                                       bool mirror_halves)
    : train_(train),
      validation_(validation),
      seed_(seed),
      forest_config_(std::move(forest_config)),
      lasso_config_(std::move(lasso_config)) {
  train_.Validate();
  if (validation_.cols() != train_.data.cols()) {
    throw SchemaError("validation data has " + std::to_string(validation_.cols()) +
                      " columns, training data " +
                      std::to_string(train_.data.cols()));
  }
  for (Index j = 0; j < validation_.cols(); ++j) {
    if (validation_.column(j).name != train_.data.column(j).name) {
      throw SchemaError("validation column '" + validation_.column(j).name +
                        "' does not match training column '" +
                        train_.data.column(j).name + "'");
    }
  }
  forest_config_.learner = Learner::kForest;
  lasso_config_.learner = Learner::kLasso;
  plan_ = SplitHalf(train_.size(), DeriveSeed(seed_, SeedTag::kHalfSplit, 0),
                    mirror_halves);
}

const LearnerConfig& ReplicationContext::config(Learner l) const {
  return l == Learner::kForest ? forest_config_ : lasso_config_;
}

const FeatureExpansion& ReplicationContext::expansion() {
  Design(Learner::kLasso);
  return *expansion_;
}

const LearnerDesign& ReplicationContext::Design(Learner l) {
  if (l == Learner::kForest) {
    if (!forest_design_) {
      forest_design_ = LearnerDesign{train_.data.x(), validation_.x()};
    }
    return *forest_design_;
  }
  if (!lasso_design_) {
    auto [expanded, recipe] = ExpandFeatures(train_.data);
    lasso_design_ =
        LearnerDesign{expanded.x(), recipe.Apply(validation_).x()};
    expansion_ = std::move(recipe);
  }
  return *lasso_design_;
}

const Nuisances& ReplicationContext::GetNuisances(Learner l, unsigned mask) {
  auto it = nuisances_.find(l);
  if (it != nuisances_.end() && it->second.Has(mask)) return it->second;
  const unsigned have = it == nuisances_.end() ? 0u : it->second.available;
  const unsigned missing = mask & ~have;
  Nuisances fresh = EstimateNuisances(train_, Design(l).train, config(l),
                                      missing, plan_, seed_);
  if (it == nuisances_.end()) {
    it = nuisances_.emplace(l, std::move(fresh)).first;
    return it->second;
  }
  Nuisances& cached = it->second;
  if (missing & kNuisanceP) cached.p_hat = std::move(fresh.p_hat);
  if (missing & kNuisanceMu) cached.mu_hat = std::move(fresh.mu_hat);
  if (missing & kNuisanceMu1) cached.mu1_hat = std::move(fresh.mu1_hat);
  if (missing & kNuisanceMu0) cached.mu0_hat = std::move(fresh.mu0_hat);
  cached.available |= missing;
  return cached;
}

void ReplicationContext::SetNuisances(Learner l, Nuisances n) {
  if (n.plan.fold != plan_.fold) {
    throw ArgumentError("injected nuisances use a different split plan");
  }
  const Index size = train_.size();
  auto check = [&](unsigned bit, const Eigen::VectorXd& v, const char* name) {
    if ((n.available & bit) && v.size() != size) {
      throw ArgumentError(std::string("injected ") + name + " has wrong length");
    }
  };
  check(kNuisanceP, n.p_hat, "p_hat");
  check(kNuisanceMu, n.mu_hat, "mu_hat");
  check(kNuisanceMu1, n.mu1_hat, "mu1_hat");
  check(kNuisanceMu0, n.mu0_hat, "mu0_hat");
  nuisances_[l] = std::move(n);
}

}  // namespace cmlmc
