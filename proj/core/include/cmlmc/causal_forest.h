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
#ifndef CMLMC_CAUSAL_FOREST_H_
#define CMLMC_CAUSAL_FOREST_H_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cmlmc/forest.h"

namespace cmlmc {

enum class Centering { kNone, kLocal };

// Causal forest: trees split on per-node gradient pseudo-outcomes of the
// treatment effect; predictions are weighted mean differences.
class CausalForestModel {
 public:
  CausalForestModel() = default;

  Index n_features() const { return n_features_; }
  Index n_train() const { return arm_.size(); }
  Centering centering() const { return centering_; }
  const ForestParams& params() const { return params_; }
  const std::vector<forest_internal::Tree>& trees() const { return trees_; }

  // Effect at x, or nullopt when the forest neighbourhood of x holds only
  // one treatment arm.
  std::optional<double> Predict(std::span<const double> x) const;
  // Throws EstimationError naming the first row with a one-armed
  // neighbourhood.
  Eigen::VectorXd PredictAll(const Eigen::MatrixXd& x) const;
  // Forest weights (tree-averaged within-leaf uniform weights).
  Eigen::VectorXd Weights(std::span<const double> x) const;

  // Values the trees were grown on: raw (y, d) without centering, the
  // residuals (y - mu_hat, d - p_hat) with local centering.
  const Eigen::VectorXd& fit_outcome() const { return y_fit_; }
  const Eigen::VectorXd& fit_treatment() const { return d_fit_; }
  const Eigen::VectorXd& arm() const { return arm_; }

 private:
  friend CausalForestModel FitCausalForest(
      const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
      const ForestParams&, Centering, const Eigen::VectorXd*,
      const Eigen::VectorXd*, std::span<const std::uint64_t>);
  void ComputeLeafSums();

  struct LeafSums {
    double count = 0, d = 0, y = 0, dy = 0, dd = 0;
    int treated = 0, controls = 0;
  };

  friend struct ModelCodec;

  ForestParams params_;
  Centering centering_ = Centering::kNone;
  Index n_features_ = 0;
  std::vector<forest_internal::Tree> trees_;
  Eigen::VectorXd y_fit_, d_fit_, arm_;
  std::vector<std::vector<LeafSums>> leaf_sums_;
};

// With Centering::kLocal, p_hat and mu_hat are the cross-fitted nuisance
// predictions for the training rows; when null they are estimated here with
// two-fold cross-fitted probability and regression forests. Requires both
// arms. Nodes whose treatment has zero variance are never split.
CausalForestModel FitCausalForest(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& d,
                                  const ForestParams& params,
                                  Centering centering = Centering::kNone,
                                  const Eigen::VectorXd* p_hat = nullptr,
                                  const Eigen::VectorXd* mu_hat = nullptr,
                                  std::span<const std::uint64_t> unit_ids = {});

}  // namespace cmlmc

#endif  // CMLMC_CAUSAL_FOREST_H_
