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
#include "cmlmc/forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {

void ForestParams::Validate() const {
  if (n_trees < 1) throw ArgumentError("forest needs at least one tree");
  if (mtry < 1) throw ArgumentError("mtry must be positive");
  if (min_leaf < 1) throw ArgumentError("min_leaf must be positive");
  if (!(build_fraction > 0.0) || !(estimate_fraction > 0.0) ||
      build_fraction + estimate_fraction > 1.0 + 1e-12) {
    throw ArgumentError(
        "honest fractions must be positive and sum to at most one");
  }
  if (n_threads < 1) throw ArgumentError("n_threads must be positive");
}

int ForestParams::EffectiveMtry(Index k) const {
  return static_cast<int>(std::min<Index>(mtry, k));
}

namespace forest_internal {

int Tree::FindLeaf(std::span<const double> x) const {
  int node = 0;
  while (nodes[node].var >= 0) {
    const Node& n = nodes[node];
    node = x[n.var] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].leaf;
}

namespace {

struct SplitChoice {
  int var = -1;
  double threshold = 0.0;
  double criterion = 0.0;
};

// Scratch space reused across the nodes of one tree.
struct Workspace {
  std::vector<std::pair<double, int>> order;  // (x, position in node)
  std::vector<double> est_x;
  std::vector<double> labels;
  std::vector<int> features;
};

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& x, const NodeLabeler& labeler,
             const ForestParams& params, int mtry)
      : x_(x), labeler_(labeler), params_(params), mtry_(mtry) {}

  Tree Grow(std::vector<Index> build, std::vector<Index> estimate,
            Stream& stream) {
    tree_ = Tree();
    leaves_.clear();
    build_ = std::move(build);
    estimate_ = std::move(estimate);
    GrowNode(0, build_.size(), 0, estimate_.size(), stream);
    tree_.leaf_offsets.assign(1, 0);
    for (const auto& members : leaves_) {
      tree_.leaf_members.insert(tree_.leaf_members.end(), members.begin(),
                                members.end());
      tree_.leaf_offsets.push_back(static_cast<int>(tree_.leaf_members.size()));
    }
    return std::move(tree_);
  }

 private:
  int MakeLeaf(std::size_t e_begin, std::size_t e_end) {
    Node node;
    node.leaf = static_cast<int>(leaves_.size());
    std::vector<int> members;
    members.reserve(e_end - e_begin);
    for (std::size_t i = e_begin; i < e_end; ++i) {
      members.push_back(static_cast<int>(estimate_[i]));
    }
    leaves_.push_back(std::move(members));
    tree_.nodes.push_back(node);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  int GrowNode(std::size_t b_begin, std::size_t b_end, std::size_t e_begin,
               std::size_t e_end, Stream& stream) {
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    const std::size_t nb = b_end - b_begin;
    const std::size_t ne = e_end - e_begin;
    if (nb < 2 * min_leaf || ne < 2 * min_leaf) return MakeLeaf(e_begin, e_end);

    std::span<const Index> units(build_.data() + b_begin, nb);
    ws_.labels.resize(nb);
    if (!labeler_.Label(units, ws_.labels)) return MakeLeaf(e_begin, e_end);
    const auto [lo, hi] = std::minmax_element(ws_.labels.begin(), ws_.labels.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*lo))) {
      return MakeLeaf(e_begin, e_end);
    }

    SampleFeatures(stream);
    const SplitChoice best = FindBestSplit(units, e_begin, e_end);
    if (best.var < 0) return MakeLeaf(e_begin, e_end);

    // Stable partitions keep both subsets in unit-id order.
    const auto goes_left = [&](Index i) {
      return x_(i, best.var) <= best.threshold;
    };
    const auto b_mid = std::stable_partition(build_.begin() + b_begin,
                                             build_.begin() + b_end, goes_left) -
                       build_.begin();
    const auto e_mid = std::stable_partition(estimate_.begin() + e_begin,
                                             estimate_.begin() + e_end,
                                             goes_left) -
                       estimate_.begin();

    const int self = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(Node{best.var, best.threshold, -1, -1, -1});
    const int left = GrowNode(b_begin, b_mid, e_begin, e_mid, stream);
    const int right = GrowNode(b_mid, b_end, e_mid, e_end, stream);
    tree_.nodes[self].left = left;
    tree_.nodes[self].right = right;
    return self;
  }

  // mtry distinct features, ascending.
  void SampleFeatures(Stream& stream) {
    const int k = static_cast<int>(x_.cols());
    auto& f = ws_.features;
    f.resize(k);
    std::iota(f.begin(), f.end(), 0);
    for (int i = 0; i < mtry_; ++i) {
      const int j = i + static_cast<int>(stream.Below(static_cast<std::uint64_t>(k - i)));
      std::swap(f[i], f[j]);
    }
    f.resize(mtry_);
    std::sort(f.begin(), f.end());
  }

  SplitChoice FindBestSplit(std::span<const Index> units, std::size_t e_begin,
                            std::size_t e_end) {
    const std::size_t nb = units.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    const std::size_t ne = e_end - e_begin;
    const Eigen::VectorXd* arms = labeler_.arms();
    std::size_t treated_total = 0;
    if (arms) {
      for (Index u : units) treated_total += (*arms)[u] > 0.5 ? 1 : 0;
      if (treated_total == 0 || treated_total == nb) return {};
    }
    double label_total = 0.0;
    for (double l : ws_.labels) label_total += l;

    SplitChoice best;
    for (int var : ws_.features) {
      auto& order = ws_.order;
      order.resize(nb);
      for (std::size_t p = 0; p < nb; ++p) {
        order[p] = {x_(units[p], var), static_cast<int>(p)};
      }
      std::sort(order.begin(), order.end());
      if (order.front().first == order.back().first) continue;

      auto& ex = ws_.est_x;
      ex.resize(ne);
      for (std::size_t q = 0; q < ne; ++q) ex[q] = x_(estimate_[e_begin + q], var);
      std::sort(ex.begin(), ex.end());

      double left_sum = 0.0;
      std::size_t left_treated = 0;
      std::size_t est_left = 0;
      for (std::size_t p = 0; p + 1 < nb; ++p) {
        const int pos = order[p].second;
        left_sum += ws_.labels[pos];
        if (arms && (*arms)[units[pos]] > 0.5) ++left_treated;
        const double here = order[p].first;
        const double next = order[p + 1].first;
        if (here == next) continue;
        const std::size_t n_left = p + 1;
        const std::size_t n_right = nb - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        double threshold = here + (next - here) / 2.0;
        if (!(threshold < next)) threshold = here;
        while (est_left < ne && ex[est_left] <= threshold) ++est_left;
        if (est_left < min_leaf) continue;
        if (ne - est_left < min_leaf) break;
        if (arms) {
          const std::size_t right_treated = treated_total - left_treated;
          if (left_treated == 0 || left_treated == n_left ||
              right_treated == 0 || right_treated == n_right) {
            continue;
          }
        }
        const double nl = static_cast<double>(n_left);
        const double nr = static_cast<double>(n_right);
        const double diff = left_sum / nl - (label_total - left_sum) / nr;
        const double criterion = nl * nr * diff * diff;
        if (criterion > best.criterion) {
          best = {var, threshold, criterion};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const NodeLabeler& labeler_;
  const ForestParams& params_;
  int mtry_;
  Tree tree_;
  std::vector<std::vector<int>> leaves_;
  std::vector<Index> build_;
  std::vector<Index> estimate_;
  Workspace ws_;
};

template <typename Fn>
void ParallelFor(int count, int n_threads, Fn&& fn) {
  n_threads = std::max(1, std::min(n_threads, count));
  if (n_threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    workers.emplace_back([&, t] {
      for (int i = t; i < count; i += n_threads) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

std::vector<Tree> GrowForest(const Eigen::MatrixXd& x,
                             std::span<const std::uint64_t> unit_ids,
                             const NodeLabeler& labeler,
                             const ForestParams& params) {
  params.Validate();
  const Index n = x.rows();
  if (n < 4) {
    throw ArgumentError("forest needs at least 4 training units, got " +
                        std::to_string(n));
  }
  std::vector<std::uint64_t> ids(n);
  if (unit_ids.empty()) {
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
  } else {
    if (static_cast<Index>(unit_ids.size()) != n) {
      throw ArgumentError("unit id count does not match the training rows");
    }
    ids.assign(unit_ids.begin(), unit_ids.end());
  }
  const auto n_build = std::max<Index>(
      1, static_cast<Index>(std::floor(static_cast<double>(n) * params.build_fraction)));
  const auto n_est = std::max<Index>(
      1, static_cast<Index>(std::floor(static_cast<double>(n) * params.estimate_fraction)));
  const int mtry = params.EffectiveMtry(x.cols());

  std::vector<Tree> trees(params.n_trees);
  ParallelFor(params.n_trees, params.n_threads, [&](int t) {
    const std::uint64_t key = DeriveSeed(params.seed, SeedTag::kTree,
                                         static_cast<std::uint64_t>(t));
    // Honest partition keyed on unit ids only.
    std::vector<std::pair<std::uint64_t, Index>> keyed(n);
    for (Index i = 0; i < n; ++i) keyed[i] = {Mix64(key ^ Mix64(ids[i])), i};
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : ids[a.second] < ids[b.second];
    });
    std::vector<Index> build(n_build), estimate(n_est);
    for (Index i = 0; i < n_build; ++i) build[i] = keyed[i].second;
    for (Index i = 0; i < n_est; ++i) estimate[i] = keyed[n_build + i].second;
    const auto by_id = [&](Index a, Index b) { return ids[a] < ids[b]; };
    std::sort(build.begin(), build.end(), by_id);
    std::sort(estimate.begin(), estimate.end(), by_id);

    Stream stream(DeriveSeed(key, SeedTag::kTree, 0));
    TreeGrower grower(x, labeler, params, mtry);
    trees[t] = grower.Grow(std::move(build), std::move(estimate), stream);
  });
  return trees;
}

}  // namespace forest_internal

namespace {

class OutcomeLabeler : public forest_internal::NodeLabeler {
 public:
  explicit OutcomeLabeler(const Eigen::VectorXd& y) : y_(y) {}
  bool Label(std::span<const Index> units,
             std::span<double> labels) const override {
    for (std::size_t i = 0; i < units.size(); ++i) labels[i] = y_[units[i]];
    return true;
  }

 private:
  const Eigen::VectorXd& y_;
};

std::vector<double> RowBuffer(const Eigen::MatrixXd& x, Index i) {
  std::vector<double> row(x.cols());
  for (Index j = 0; j < x.cols(); ++j) row[j] = x(i, j);
  return row;
}

void CheckFitInputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    throw ArgumentError("outcome length does not match the covariate rows");
  }
  if (!y.allFinite()) throw ArgumentError("outcome has non-finite values");
}

}  // namespace

void ForestModel::ComputeLeafMeans() {
  leaf_means_.resize(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto& tree = trees_[t];
    auto& means = leaf_means_[t];
    means.resize(tree.n_leaves());
    for (int l = 0; l < tree.n_leaves(); ++l) {
      const auto members = tree.Members(l);
      double sum = 0.0;
      for (int i : members) sum += outcome_[i];
      means[l] = sum / static_cast<double>(members.size());
    }
  }
}

double ForestModel::Predict(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != n_features_) {
    throw ArgumentError("query has " + std::to_string(x.size()) +
                        " covariates, forest expects " +
                        std::to_string(n_features_));
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    sum += leaf_means_[t][trees_[t].FindLeaf(x)];
  }
  const double value = sum / static_cast<double>(trees_.size());
  if (probability_) {
    return std::clamp(value, kProbabilityClamp, 1.0 - kProbabilityClamp);
  }
  return value;
}

Eigen::VectorXd ForestModel::PredictAll(const Eigen::MatrixXd& x) const {
  if (x.cols() != n_features_) {
    throw ArgumentError("query matrix has " + std::to_string(x.cols()) +
                        " columns, forest expects " + std::to_string(n_features_));
  }
  Eigen::VectorXd out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const auto row = RowBuffer(x, i);
    out[i] = Predict(row);
  }
  return out;
}

Eigen::VectorXd ForestModel::Weights(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != n_features_) {
    throw ArgumentError("query dimension does not match the forest");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(outcome_.size());
  const double per_tree = 1.0 / static_cast<double>(trees_.size());
  for (const auto& tree : trees_) {
    const auto members = tree.Members(tree.FindLeaf(x));
    const double share = per_tree / static_cast<double>(members.size());
    for (int i : members) w[i] += share;
  }
  return w;
}

ForestModel FitRegressionForest(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y,
                                const ForestParams& params,
                                std::span<const std::uint64_t> unit_ids) {
  CheckFitInputs(x, y);
  ForestModel model;
  model.params_ = params;
  model.n_features_ = x.cols();
  model.outcome_ = y;
  OutcomeLabeler labeler(model.outcome_);
  model.trees_ = forest_internal::GrowForest(x, unit_ids, labeler, params);
  model.ComputeLeafMeans();
  return model;
}

ForestModel FitProbabilityForest(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& d,
                                 const ForestParams& params,
                                 std::span<const std::uint64_t> unit_ids) {
  CheckFitInputs(x, d);
  Index ones = 0;
  for (Index i = 0; i < d.size(); ++i) {
    if (d[i] != 0.0 && d[i] != 1.0) {
      throw ArgumentError("probability forest needs a 0/1 outcome");
    }
    ones += d[i] == 1.0 ? 1 : 0;
  }
  if (ones == 0 || ones == d.size()) {
    throw EstimationError("probability forest needs both classes");
  }
  ForestModel model = FitRegressionForest(x, d, params, unit_ids);
  model.probability_ = true;
  return model;
}

}  // namespace cmlmc
