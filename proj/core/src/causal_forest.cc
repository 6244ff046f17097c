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
#include "cmlmc/causal_forest.h"

#include <cmath>
#include <string>

#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {
namespace {

// Relabels a parent node with
//   rho_i = (D_i - Dbar)(Y_i - Ybar - (D_i - Dbar) beta) / Var(D)
// where beta is the within-node regression slope of Y on D (the mean
// difference for binary D).
class PseudoOutcomeLabeler : public forest_internal::NodeLabeler {
 public:
  PseudoOutcomeLabeler(const Eigen::VectorXd& y, const Eigen::VectorXd& d,
                       const Eigen::VectorXd& arm)
      : y_(y), d_(d), arm_(arm) {}

  bool Label(std::span<const Index> units,
             std::span<double> labels) const override {
    const auto n = static_cast<double>(units.size());
    double d_mean = 0.0, y_mean = 0.0;
    for (Index u : units) {
      d_mean += d_[u];
      y_mean += y_[u];
    }
    d_mean /= n;
    y_mean /= n;
    double var = 0.0, cov = 0.0;
    for (Index u : units) {
      const double dc = d_[u] - d_mean;
      var += dc * dc;
      cov += dc * (y_[u] - y_mean);
    }
    var /= n;
    cov /= n;
    if (!(var > 1e-12)) return false;
    const double beta = cov / var;
    for (std::size_t i = 0; i < units.size(); ++i) {
      const double dc = d_[units[i]] - d_mean;
      labels[i] = dc * (y_[units[i]] - y_mean - dc * beta) / var;
    }
    return true;
  }

  const Eigen::VectorXd* arms() const override { return &arm_; }

 private:
  const Eigen::VectorXd& y_;
  const Eigen::VectorXd& d_;
  const Eigen::VectorXd& arm_;
};

std::vector<double> RowBuffer(const Eigen::MatrixXd& x, Index i) {
  std::vector<double> row(x.cols());
  for (Index j = 0; j < x.cols(); ++j) row[j] = x(i, j);
  return row;
}

// Two-fold cross-fitted p(x) and mu(x) with forests.
void CrossFitCentering(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& d, const ForestParams& params,
                       Eigen::VectorXd& p_hat, Eigen::VectorXd& mu_hat) {
  const Index n = x.rows();
  const SplitPlan plan =
      SplitHalf(n, DeriveSeed(params.seed, SeedTag::kCentering, 0));
  p_hat.resize(n);
  mu_hat.resize(n);
  for (int f = 0; f < 2; ++f) {
    const auto fit_rows = plan.Members(f);
    const auto pred_rows = plan.Members(1 - f);
    Eigen::MatrixXd xf(static_cast<Index>(fit_rows.size()), x.cols());
    Eigen::VectorXd yf(xf.rows()), df(xf.rows());
    for (std::size_t r = 0; r < fit_rows.size(); ++r) {
      xf.row(static_cast<Index>(r)) = x.row(fit_rows[r]);
      yf[static_cast<Index>(r)] = y[fit_rows[r]];
      df[static_cast<Index>(r)] = d[fit_rows[r]];
    }
    ForestParams fp = params;
    fp.seed = DeriveSeed(params.seed, SeedTag::kCentering, 1 + f);
    const ForestModel prop = FitProbabilityForest(xf, df, fp);
    fp.seed = DeriveSeed(params.seed, SeedTag::kCentering, 3 + f);
    const ForestModel mean = FitRegressionForest(xf, yf, fp);
    for (Index i : pred_rows) {
      const auto row = RowBuffer(x, i);
      p_hat[i] = prop.Predict(row);
      mu_hat[i] = mean.Predict(row);
    }
  }
}

}  // namespace

void CausalForestModel::ComputeLeafSums() {
  leaf_sums_.resize(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto& tree = trees_[t];
    auto& sums = leaf_sums_[t];
    sums.assign(tree.n_leaves(), LeafSums{});
    for (int l = 0; l < tree.n_leaves(); ++l) {
      LeafSums& s = sums[l];
      for (int i : tree.Members(l)) {
        const double di = d_fit_[i], yi = y_fit_[i];
        s.count += 1.0;
        s.d += di;
        s.y += yi;
        s.dy += di * yi;
        s.dd += di * di;
        if (arm_[i] > 0.5) {
          ++s.treated;
        } else {
          ++s.controls;
        }
      }
    }
  }
}

std::optional<double> CausalForestModel::Predict(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != n_features_) {
    throw ArgumentError("query has " + std::to_string(x.size()) +
                        " covariates, forest expects " +
                        std::to_string(n_features_));
  }
  double w = 0, sd = 0, sy = 0, sdy = 0, sdd = 0, treated = 0, controls = 0;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const LeafSums& s = leaf_sums_[t][trees_[t].FindLeaf(x)];
    const double share = 1.0 / s.count;
    w += 1.0;
    sd += share * s.d;
    sy += share * s.y;
    sdy += share * s.dy;
    sdd += share * s.dd;
    treated += share * s.treated;
    controls += share * s.controls;
  }
  if (treated <= 0.0 || controls <= 0.0) return std::nullopt;
  const double d_mean = sd / w;
  const double y_mean = sy / w;
  const double cov = sdy / w - d_mean * y_mean;
  const double var = sdd / w - d_mean * d_mean;
  if (!(var > 0.0)) return std::nullopt;
  return cov / var;
}

Eigen::VectorXd CausalForestModel::PredictAll(const Eigen::MatrixXd& x) const {
  if (x.cols() != n_features_) {
    throw ArgumentError("query matrix does not match the forest dimension");
  }
  Eigen::VectorXd out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const auto row = RowBuffer(x, i);
    const auto value = Predict(row);
    if (!value) {
      throw EstimationError("causal forest neighbourhood of query row " +
                            std::to_string(i) + " holds a single arm");
    }
    out[i] = *value;
  }
  return out;
}

Eigen::VectorXd CausalForestModel::Weights(std::span<const double> x) const {
  if (static_cast<Index>(x.size()) != n_features_) {
    throw ArgumentError("query dimension does not match the forest");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(arm_.size());
  const double per_tree = 1.0 / static_cast<double>(trees_.size());
  for (const auto& tree : trees_) {
    const auto members = tree.Members(tree.FindLeaf(x));
    const double share = per_tree / static_cast<double>(members.size());
    for (int i : members) w[i] += share;
  }
  return w;
}

CausalForestModel FitCausalForest(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& d,
                                  const ForestParams& params,
                                  Centering centering,
                                  const Eigen::VectorXd* p_hat,
                                  const Eigen::VectorXd* mu_hat,
                                  std::span<const std::uint64_t> unit_ids) {
  const Index n = x.rows();
  if (y.size() != n || d.size() != n) {
    throw ArgumentError("causal forest inputs have mismatched lengths");
  }
  Index treated = 0;
  for (Index i = 0; i < n; ++i) {
    if (d[i] != 0.0 && d[i] != 1.0) throw ArgumentError("treatment must be 0/1");
    treated += d[i] == 1.0 ? 1 : 0;
  }
  if (treated == 0 || treated == n) {
    throw EstimationError("causal forest needs treated and control units");
  }

  CausalForestModel model;
  model.params_ = params;
  model.centering_ = centering;
  model.n_features_ = x.cols();
  model.arm_ = d;
  if (centering == Centering::kNone) {
    model.y_fit_ = y;
    model.d_fit_ = d;
  } else {
    Eigen::VectorXd p, mu;
    if (p_hat && mu_hat) {
      if (p_hat->size() != n || mu_hat->size() != n) {
        throw ArgumentError("centering nuisances have mismatched lengths");
      }
      p = *p_hat;
      mu = *mu_hat;
    } else {
      CrossFitCentering(x, y, d, params, p, mu);
    }
    model.y_fit_ = y - mu;
    model.d_fit_ = d - p;
  }
  PseudoOutcomeLabeler labeler(model.y_fit_, model.d_fit_, model.arm_);
  model.trees_ = forest_internal::GrowForest(x, unit_ids, labeler, params);
  model.ComputeLeafSums();
  return model;
}

}  // namespace cmlmc
