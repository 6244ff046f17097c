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
#ifndef CMLMC_CAUSAL_H_
#define CMLMC_CAUSAL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmlmc/data.h"
#include "cmlmc/features.h"
#include "cmlmc/forest.h"
#include "cmlmc/lasso.h"

namespace cmlmc {

enum class Method {
  kInfeasible,
  kCmr,
  kMomIpw,
  kMomDr,
  kMcm,
  kMcmEa,
  kRlearn,
  kCf,
  kCfLc,
};

enum class Learner { kForest, kLasso };

const char* MethodName(Method m);
const char* LearnerName(Learner l);
Method ParseMethod(const std::string& text);
Learner ParseLearner(const std::string& text);

struct LearnerConfig {
  Learner learner = Learner::kForest;
  ForestParams forest;
  LassoParams lasso;
};

struct EstimatorSpec {
  Method method = Method::kCmr;
  Learner learner = Learner::kForest;

  // "method:learner", e.g. "mom_dr:forest".
  std::string Id() const;
  static EstimatorSpec Parse(const std::string& id);
  // MCM, MCM-EA and R-learning need the weighted Lasso; both causal forest
  // variants need forests. Throws ArgumentError otherwise.
  void Validate() const;
  bool cross_fit() const;
};

// All thirteen estimator/learner combinations, infeasible benchmarks first.
std::vector<EstimatorSpec> AllEstimators();

// Nuisance components, combinable as a bit set.
enum NuisanceMask : unsigned {
  kNuisanceP = 1u << 0,
  kNuisanceMu = 1u << 1,
  kNuisanceMu1 = 1u << 2,
  kNuisanceMu0 = 1u << 3,
};

unsigned RequiredNuisances(Method m);

// Cross-fitted nuisance predictions for every training unit. Unit i's
// values come from models fitted on the half that does not contain i.
struct Nuisances {
  SplitPlan plan;
  unsigned available = 0;
  Eigen::VectorXd p_hat;   // clamped to [0.01, 0.99]
  Eigen::VectorXd mu_hat;  // E[Y | X]
  Eigen::VectorXd mu1_hat; // E[Y | X, D = 1]
  Eigen::VectorXd mu0_hat; // E[Y | X, D = 0]
  // Fold whose models produced unit i's predictions (= 1 - plan.fold[i]).
  std::vector<int> predicted_by;

  bool Has(unsigned mask) const { return (available & mask) == mask; }
};

// Raw covariates for forests, expanded features for Lasso.
struct LearnerDesign {
  Eigen::MatrixXd train;
  Eigen::MatrixXd validation;
};

// Everything derived once per replication and shared by the estimators: the
// cross-fitting split, the Lasso feature expansion, and cached nuisances per
// learner. Not thread-safe; use one context per worker.
class ReplicationContext {
 public:
  ReplicationContext(const Sample& train, const Dataset& validation,
                     std::uint64_t seed, LearnerConfig forest_config,
                     LearnerConfig lasso_config, bool mirror_halves = false);

  const Sample& train() const { return train_; }
  const Dataset& validation() const { return validation_; }
  std::uint64_t seed() const { return seed_; }
  const SplitPlan& plan() const { return plan_; }
  const LearnerConfig& config(Learner l) const;

  const LearnerDesign& Design(Learner l);
  const FeatureExpansion& expansion();

  // Cached cross-fitted nuisances for the learner, computing any missing
  // components on demand.
  const Nuisances& GetNuisances(Learner l, unsigned mask);
  // Dependency injection, e.g. oracle nuisances. The plan must match.
  void SetNuisances(Learner l, Nuisances n);

 private:
  const Sample& train_;
  const Dataset& validation_;
  std::uint64_t seed_;
  SplitPlan plan_;
  LearnerConfig forest_config_, lasso_config_;
  std::optional<LearnerDesign> forest_design_, lasso_design_;
  std::optional<FeatureExpansion> expansion_;
  std::map<Learner, Nuisances> nuisances_;
};

// Fits the requested components on each half and predicts the other half.
// Per-arm regressions use only that arm's units of the training half.
// Throws EstimationError when a half lacks a needed arm or class.
Nuisances EstimateNuisances(const Sample& sample, const Eigen::MatrixXd& x,
                            const LearnerConfig& config, unsigned mask,
                            const SplitPlan& plan, std::uint64_t seed);
Nuisances EstimateNuisances(const Sample& sample, const LearnerConfig& config,
                            unsigned mask, std::uint64_t seed);

enum class CovariateMode { kRaw, kMcmModified, kRlModified };

// Weighted minimization problem min sum_i w_i (Y*_i - tau(X_i))^2.
struct TransformedProblem {
  Eigen::VectorXd weights;
  Eigen::VectorXd pseudo_outcome;
  CovariateMode covariate_mode = CovariateMode::kRaw;
};

TransformedProblem TransformMomIpw(const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& d,
                                   const Eigen::VectorXd& p);
TransformedProblem TransformMomDr(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& d,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& mu1,
                                  const Eigen::VectorXd& mu0);
// mu is required when efficiency_augment is set.
TransformedProblem TransformMcm(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& d,
                                const Eigen::VectorXd& p,
                                bool efficiency_augment,
                                const Eigen::VectorXd* mu = nullptr);
TransformedProblem TransformRlearn(const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& d,
                                   const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& mu);

// Modified-covariate formulations: MCM uses (T/2) x with weights
// T (D - p) / (p (1 - p)) and response y; R-learning uses (D - p) x with unit
// weights and response y - mu. A linear IATE fitted this way has the same
// coefficients as the weighted formulation above.
Eigen::MatrixXd McmModifiedCovariates(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& d);
Eigen::VectorXd McmModifiedWeights(const Eigen::VectorXd& d,
                                   const Eigen::VectorXd& p);
Eigen::MatrixXd RlModifiedCovariates(const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& d,
                                     const Eigen::VectorXd& p);

// Seed of one learner fit inside an estimator. Slot 0 is the single fit of
// infeasible, cmr controls and both causal forests, slot 1 the cmr treated
// fit, and slot 2 + (smallest unit index of the half) each cross-fitted
// half.
std::uint64_t EstimatorSeed(std::uint64_t seed, const EstimatorSpec& spec,
                            std::uint64_t slot);

// IATE predictions on ctx.validation() for one estimator.
Eigen::VectorXd EstimateIate(const EstimatorSpec& spec,
                             ReplicationContext& ctx);
// Convenience wrapper building a fresh context with default learner
// parameters taken from the given configs.
Eigen::VectorXd EstimateIate(const EstimatorSpec& spec, const Sample& train,
                             const Dataset& validation, std::uint64_t seed,
                             const LearnerConfig& forest_config,
                             const LearnerConfig& lasso_config);

struct Aggregates {
  Eigen::VectorXd gate;
  double ate = 0.0;
};

// gate[g] = mean of iate over units labelled g (labels 0..G-1, all
// non-empty); ate = mean of iate.
Aggregates Aggregate(const Eigen::VectorXd& iate, const std::vector<int>& groups);

}  // namespace cmlmc

#endif  // CMLMC_CAUSAL_H_
