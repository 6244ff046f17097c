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
#ifndef CMLMC_FOREST_H_
#define CMLMC_FOREST_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cmlmc/data.h"

namespace cmlmc {

struct ForestParams {
  int n_trees = 1000;
  // Candidate split variables per node, sampled without replacement.
  // Clamped to the number of covariates at fit time.
  int mtry = 70;
  int min_leaf = 1;
  // Per-tree honest partition of the training sample; the remainder is left
  // out of that tree.
  double build_fraction = 0.25;
  double estimate_fraction = 0.25;
  std::uint64_t seed = 0;
  int n_threads = 1;

  void Validate() const;
  int EffectiveMtry(Index k) const;
};

// Lower clamp for probability predictions; the upper clamp is 1 - this.
inline constexpr double kProbabilityClamp = 0.01;

struct ModelCodec;

namespace forest_internal {

struct Node {
  int var = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;  // leaf slot when var == -1
};

// One honest tree. Leaf members are estimation-sample row indices of the
// training data, ordered by unit id.
struct Tree {
  std::vector<Node> nodes;
  std::vector<int> leaf_offsets;  // size n_leaves + 1
  std::vector<int> leaf_members;

  int FindLeaf(std::span<const double> x) const;
  std::span<const int> Members(int leaf) const {
    return {leaf_members.data() + leaf_offsets[leaf],
            leaf_members.data() + leaf_offsets[leaf + 1]};
  }
  int n_leaves() const { return static_cast<int>(leaf_offsets.size()) - 1; }
};

// Split labels for one node. Regression trees label by the outcome; causal
// trees relabel each parent node with gradient pseudo-outcomes.
class NodeLabeler {
 public:
  virtual ~NodeLabeler() = default;
  // Fills labels[i] for every unit in 'units'. Returns false when the node
  // must not be split.
  virtual bool Label(std::span<const Index> units,
                     std::span<double> labels) const = 0;
  // Optional per-unit arm (0/1) used to require both arms in each child.
  virtual const Eigen::VectorXd* arms() const { return nullptr; }
};

std::vector<Tree> GrowForest(const Eigen::MatrixXd& x,
                             std::span<const std::uint64_t> unit_ids,
                             const NodeLabeler& labeler,
                             const ForestParams& params);

}  // namespace forest_internal

// Honest regression or probability forest.
class ForestModel {
 public:
  ForestModel() = default;

  Index n_features() const { return n_features_; }
  Index n_train() const { return outcome_.size(); }
  const ForestParams& params() const { return params_; }
  const std::vector<forest_internal::Tree>& trees() const { return trees_; }
  bool is_probability() const { return probability_; }

  double Predict(std::span<const double> x) const;
  Eigen::VectorXd PredictAll(const Eigen::MatrixXd& x) const;
  // Nonnegative weights over training rows, summing to one; zero for rows
  // never in an estimation sample reachable from x.
  Eigen::VectorXd Weights(std::span<const double> x) const;

 private:
  friend ForestModel FitRegressionForest(const Eigen::MatrixXd&,
                                         const Eigen::VectorXd&,
                                         const ForestParams&,
                                         std::span<const std::uint64_t>);
  friend ForestModel FitProbabilityForest(const Eigen::MatrixXd&,
                                          const Eigen::VectorXd&,
                                          const ForestParams&,
                                          std::span<const std::uint64_t>);
  friend struct ModelCodec;
  void ComputeLeafMeans();

  ForestParams params_;
  Index n_features_ = 0;
  bool probability_ = false;
  std::vector<forest_internal::Tree> trees_;
  Eigen::VectorXd outcome_;
  std::vector<std::vector<double>> leaf_means_;
};

// unit_ids: optional stable identifiers (default 0..n-1). The honest
// partition and all tie-breaking are keyed on ids, so predictions do not
// depend on row order.
ForestModel FitRegressionForest(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const ForestParams& params,
                                std::span<const std::uint64_t> unit_ids = {});
// Requires both classes; predictions clamped to [0.01, 0.99].
ForestModel FitProbabilityForest(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& d,
                                 const ForestParams& params,
                                 std::span<const std::uint64_t> unit_ids = {});

}  // namespace cmlmc

#endif  // CMLMC_FOREST_H_
