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

#ifndef CMLMC_TESTS_COMMON_TOY_POPULATION_H_
#define CMLMC_TESTS_COMMON_TOY_POPULATION_H_

#include <vector>

#include <Eigen/Dense>

#include "cmlmc/causal.h"

namespace cmlmc::testing {

// A fully enumerated discrete population: covariate cells with known mass,
// propensity and finite outcome distributions per arm.
struct ToyCell {
  double mass = 0.0;
  double p = 0.5;
  std::vector<std::pair<double, double>> y1;  // (value, probability)
  std::vector<std::pair<double, double>> y0;
  double Mean(int arm) const {
    double m = 0.0;
    for (const auto& [v, w] : arm == 1 ? y1 : y0) m += v * w;
    return m;
  }
  double Tau() const { return Mean(1) - Mean(0); }
};

inline std::vector<ToyCell> ToyPopulation() {
  return {
      {0.10, 0.20, {{0, 0.1}, {5, 0.6}, {9, 0.3}}, {{0, 0.5}, {4, 0.5}}},
      {0.15, 0.35, {{2, 1.0}}, {{1, 0.25}, {3, 0.75}}},
      {0.05, 0.50, {{0, 0.3}, {33, 0.7}}, {{0, 0.9}, {33, 0.1}}},
      {0.20, 0.65, {{7, 0.5}, {8, 0.5}}, {{7, 0.5}, {8, 0.5}}},
      {0.10, 0.80, {{1, 0.2}, {2, 0.2}, {3, 0.6}}, {{6, 1.0}}},
      {0.15, 0.05, {{10, 0.4}, {12, 0.6}}, {{2, 0.3}, {20, 0.7}}},
      {0.10, 0.95, {{0, 1.0}}, {{0, 0.2}, {1, 0.8}}},
      {0.15, 0.42, {{4, 0.5}, {6, 0.25}, {13, 0.25}}, {{5, 0.5}, {11, 0.5}}},
  };
}

// One support point (d, y) of a cell with its conditional probability.
struct ToyPoint {
  double d, y, prob;
};

inline std::vector<ToyPoint> Support(const ToyCell& c) {
  std::vector<ToyPoint> out;
  for (const auto& [v, w] : c.y1) out.push_back({1.0, v, c.p * w});
  for (const auto& [v, w] : c.y0) out.push_back({0.0, v, (1.0 - c.p) * w});
  return out;
}

// Vectors over the support of one cell, with nuisances supplied per point.
struct ToyVectors {
  Eigen::VectorXd y, d, prob;
};

inline ToyVectors Vectors(const ToyCell& c) {
  const auto pts = Support(c);
  ToyVectors v{Eigen::VectorXd(pts.size()), Eigen::VectorXd(pts.size()),
               Eigen::VectorXd(pts.size())};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    v.y[i] = pts[i].y;
    v.d[i] = pts[i].d;
    v.prob[i] = pts[i].prob;
  }
  return v;
}

// Conditional expectation of the pseudo outcome in a cell, or the weighted
// least-squares constant sum(prob w Y*) / sum(prob w).
inline double CellTarget(const ToyVectors& v, const TransformedProblem& t) {
  const Eigen::ArrayXd pw = v.prob.array() * t.weights.array();
  return (pw * t.pseudo_outcome.array()).sum() / pw.sum();
}

}  // namespace cmlmc::testing

#endif  // CMLMC_TESTS_COMMON_TOY_POPULATION_H_
