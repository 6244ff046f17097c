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

namespace cmlmc {

namespace {

void CheckAligned(Index n, std::initializer_list<const Eigen::VectorXd*> vs) {
  for (const auto* v : vs) {
    if (v->size() != n) {
      throw ArgumentError("transform inputs have different lengths");
    }
  }
}

void CheckPropensity(const Eigen::VectorXd& p) {
  if (!((p.array() > 0.0) && (p.array() < 1.0)).all()) {
    throw ArgumentError("propensity scores must lie strictly inside (0, 1)");
  }
}

}  // namespace

TransformedProblem TransformMomIpw(const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& d,
                                   const Eigen::VectorXd& p) {
  CheckAligned(y.size(), {&d, &p});
  CheckPropensity(p);
  TransformedProblem t;
  t.weights = Eigen::VectorXd::Ones(y.size());
  t.pseudo_outcome =
      y.array() * (d - p).array() / (p.array() * (1.0 - p.array()));
  return t;
}

TransformedProblem TransformMomDr(const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& d,
                                  const Eigen::VectorXd& p,
                                  const Eigen::VectorXd& mu1,
                                  const Eigen::VectorXd& mu0) {
  CheckAligned(y.size(), {&d, &p, &mu1, &mu0});
  CheckPropensity(p);
  TransformedProblem t;
  t.weights = Eigen::VectorXd::Ones(y.size());
  t.pseudo_outcome = mu1.array() - mu0.array() +
                     d.array() * (y - mu1).array() / p.array() -
                     (1.0 - d.array()) * (y - mu0).array() / (1.0 - p.array());
  return t;
}

TransformedProblem TransformMcm(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& d,
                                const Eigen::VectorXd& p,
                                bool efficiency_augment,
                                const Eigen::VectorXd* mu) {
  CheckAligned(y.size(), {&d, &p});
  CheckPropensity(p);
  if (efficiency_augment) {
    if (mu == nullptr) {
      throw ArgumentError("efficiency augmentation needs mu_hat");
    }
    CheckAligned(y.size(), {mu});
  }
  const Eigen::ArrayXd sign = 2.0 * d.array() - 1.0;
  TransformedProblem t;
  t.covariate_mode = CovariateMode::kRaw;
  t.weights = sign * (d - p).array() / (4.0 * p.array() * (1.0 - p.array()));
  Eigen::ArrayXd resid = y.array();
  if (efficiency_augment) resid -= mu->array();
  t.pseudo_outcome = 2.0 * sign * resid;
  return t;
}

TransformedProblem TransformRlearn(const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& d,
                                   const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& mu) {
  CheckAligned(y.size(), {&d, &p, &mu});
  CheckPropensity(p);
  const Eigen::ArrayXd centered = (d - p).array();
  TransformedProblem t;
  t.weights = centered.square();
  t.pseudo_outcome = (y - mu).array() / centered;
  return t;
}

Eigen::MatrixXd McmModifiedCovariates(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& d) {
  if (x.rows() != d.size()) throw ArgumentError("x and d lengths differ");
  const Eigen::VectorXd half_sign = (d.array() - 0.5).matrix();
  return half_sign.asDiagonal() * x;
}

Eigen::VectorXd McmModifiedWeights(const Eigen::VectorXd& d,
                                   const Eigen::VectorXd& p) {
  CheckAligned(d.size(), {&p});
  CheckPropensity(p);
  const Eigen::ArrayXd sign = 2.0 * d.array() - 1.0;
  return sign * (d - p).array() / (p.array() * (1.0 - p.array()));
}

Eigen::MatrixXd RlModifiedCovariates(const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& d,
                                     const Eigen::VectorXd& p) {
  if (x.rows() != d.size()) throw ArgumentError("x and d lengths differ");
  CheckAligned(d.size(), {&p});
  const Eigen::VectorXd centered = d - p;
  return centered.asDiagonal() * x;
}

Aggregates Aggregate(const Eigen::VectorXd& iate, const std::vector<int>& groups) {
  if (static_cast<Index>(groups.size()) != iate.size()) {
    throw ArgumentError("group labels do not cover the IATE vector");
  }
  if (iate.size() == 0) throw ArgumentError("empty IATE vector");
  int n_groups = 0;
  for (int g : groups) {
    if (g < 0) throw ArgumentError("negative group label");
    n_groups = std::max(n_groups, g + 1);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_groups);
  std::vector<Index> count(n_groups, 0);
  for (Index i = 0; i < iate.size(); ++i) {
    sum[groups[i]] += iate[i];
    ++count[groups[i]];
  }
  Aggregates out;
  out.gate.resize(n_groups);
  for (int g = 0; g < n_groups; ++g) {
    if (count[g] == 0) {
      throw ArgumentError("group " + std::to_string(g) + " is empty");
    }
    out.gate[g] = sum[g] / static_cast<double>(count[g]);
  }
  out.ate = iate.mean();
  return out;
}

}  // namespace cmlmc
