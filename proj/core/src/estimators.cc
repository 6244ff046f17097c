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
#include <string>
#include <vector>

#include "cmlmc/causal.h"
#include "cmlmc/causal_forest.h"
#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {

namespace {

std::vector<Index> AllRows(Index n) {
  std::vector<Index> rows(n);
  for (Index i = 0; i < n; ++i) rows[i] = i;
  return rows;
}

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

// Regresses target on rows of the design with unit weights w and predicts
// the validation design.
Eigen::VectorXd RegressPredict(const LearnerConfig& config,
                               const LearnerDesign& design,
                               const Eigen::VectorXd& target,
                               const Eigen::VectorXd& weights,
                               const std::vector<Index>& rows,
                               std::uint64_t seed) {
  const Eigen::MatrixXd xf = Rows(design.train, rows);
  const Eigen::VectorXd yf = Rows(target, rows);
  if (config.learner == Learner::kForest) {
    if (xf.rows() < 4) {
      throw EstimationError("too few units (" + std::to_string(xf.rows()) +
                            ") for a forest fit");
    }
    std::vector<std::uint64_t> ids(rows.begin(), rows.end());
    ForestParams params = config.forest;
    params.seed = seed;
    return FitRegressionForest(xf, yf, params, ids).PredictAll(design.validation);
  }
  if (xf.rows() < config.lasso.n_folds) {
    throw EstimationError("too few units (" + std::to_string(xf.rows()) +
                          ") for a cross-validated Lasso fit");
  }
  LassoParams params = config.lasso;
  params.seed = seed;
  const Eigen::VectorXd wf = Rows(weights, rows);
  return FitLasso(xf, yf, wf, params).Predict(design.validation);
}

Eigen::VectorXd ConditionalMeanRegression(const EstimatorSpec& spec,
                                          ReplicationContext& ctx) {
  const Sample& s = ctx.train();
  const LearnerDesign& design = ctx.Design(spec.learner);
  const LearnerConfig& config = ctx.config(spec.learner);
  std::vector<Index> treated, controls;
  for (Index i = 0; i < s.size(); ++i) {
    (s.treatment[i] == 1.0 ? treated : controls).push_back(i);
  }
  if (treated.empty() || controls.empty()) {
    throw EstimationError("conditional mean regression needs both arms");
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.size());
  const Eigen::VectorXd m1 = RegressPredict(config, design, s.outcome, ones,
                                            treated, EstimatorSeed(ctx.seed(), spec, 1));
  const Eigen::VectorXd m0 = RegressPredict(config, design, s.outcome, ones,
                                            controls, EstimatorSeed(ctx.seed(), spec, 0));
  return m1 - m0;
}

// DML1: on each half, build the transformed problem from nuisances that
// were predicted by the other half, fit the IATE model, predict the
// validation set; average the two.
Eigen::VectorXd CrossFitted(const EstimatorSpec& spec, ReplicationContext& ctx) {
  const Sample& s = ctx.train();
  const Learner nuisance_learner = spec.learner;
  const Nuisances& nu =
      ctx.GetNuisances(nuisance_learner, RequiredNuisances(spec.method));
  TransformedProblem problem;
  switch (spec.method) {
    case Method::kMomIpw:
      problem = TransformMomIpw(s.outcome, s.treatment, nu.p_hat);
      break;
    case Method::kMomDr:
      problem = TransformMomDr(s.outcome, s.treatment, nu.p_hat, nu.mu1_hat,
                               nu.mu0_hat);
      break;
    case Method::kMcm:
      problem = TransformMcm(s.outcome, s.treatment, nu.p_hat, false);
      break;
    case Method::kMcmEa:
      problem = TransformMcm(s.outcome, s.treatment, nu.p_hat, true, &nu.mu_hat);
      break;
    case Method::kRlearn:
      problem = TransformRlearn(s.outcome, s.treatment, nu.p_hat, nu.mu_hat);
      break;
    default:
      throw ArgumentError(spec.Id() + " is not a cross-fitted transform");
  }
  const LearnerDesign& design = ctx.Design(spec.learner);
  const LearnerConfig& config = ctx.config(spec.learner);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(design.validation.rows());
  for (int h = 0; h < 2; ++h) {
    const auto rows = ctx.plan().Members(h);
    if (rows.empty()) throw EstimationError("a cross-fitting half is empty");
    total += RegressPredict(config, design, problem.pseudo_outcome,
                            problem.weights, rows,
                            EstimatorSeed(ctx.seed(), spec,
                                       2 + static_cast<std::uint64_t>(rows.front())));
  }
  return 0.5 * total;
}

Eigen::VectorXd CausalForest(const EstimatorSpec& spec, ReplicationContext& ctx) {
  const Sample& s = ctx.train();
  const LearnerDesign& design = ctx.Design(Learner::kForest);
  ForestParams params = ctx.config(Learner::kForest).forest;
  params.seed = EstimatorSeed(ctx.seed(), spec, 0);
  CausalForestModel model;
  if (spec.method == Method::kCf) {
    model = FitCausalForest(design.train, s.outcome, s.treatment, params);
  } else {
    const Nuisances& nu =
        ctx.GetNuisances(Learner::kForest, kNuisanceP | kNuisanceMu);
    model = FitCausalForest(design.train, s.outcome, s.treatment, params,
                            Centering::kLocal, &nu.p_hat, &nu.mu_hat);
  }
  return model.PredictAll(design.validation);
}

}  // namespace

std::uint64_t EstimatorSeed(std::uint64_t seed, const EstimatorSpec& spec,
                            std::uint64_t slot) {
  const std::uint64_t code = static_cast<std::uint64_t>(spec.method) * 2 +
                             static_cast<std::uint64_t>(spec.learner);
  return DeriveSeed(DeriveSeed(seed, SeedTag::kIate, code), SeedTag::kIate, slot);
}

Eigen::VectorXd EstimateIate(const EstimatorSpec& spec, ReplicationContext& ctx) {
  spec.Validate();
  const Sample& s = ctx.train();
  switch (spec.method) {
    case Method::kInfeasible: {
      if (!s.true_ite) {
        throw ArgumentError("the infeasible benchmark needs true ITEs, which "
                            "are only available for simulated samples");
      }
      return RegressPredict(ctx.config(spec.learner), ctx.Design(spec.learner),
                            *s.true_ite, Eigen::VectorXd::Ones(s.size()),
                            AllRows(s.size()), EstimatorSeed(ctx.seed(), spec, 0));
    }
    case Method::kCmr:
      return ConditionalMeanRegression(spec, ctx);
    case Method::kCf:
    case Method::kCfLc:
      return CausalForest(spec, ctx);
    default:
      return CrossFitted(spec, ctx);
  }
}

Eigen::VectorXd EstimateIate(const EstimatorSpec& spec, const Sample& train,
                             const Dataset& validation, std::uint64_t seed,
                             const LearnerConfig& forest_config,
                             const LearnerConfig& lasso_config) {
  ReplicationContext ctx(train, validation, seed, forest_config, lasso_config);
  return EstimateIate(spec, ctx);
}

}  // namespace cmlmc
