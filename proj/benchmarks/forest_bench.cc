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

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "cmlmc/causal_forest.h"
#include "cmlmc/forest.h"
#include "cmlmc/rng.h"

namespace cmlmc {
namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd d;
};

Problem MakeProblem(Index n, Index k) {
  Stream rng(17);
  Problem p{Eigen::MatrixXd(n, k), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) p.x(i, j) = rng.Normal();
    p.d[i] = rng.Bernoulli(0.5) ? 1.0 : 0.0;
    p.y[i] = p.x(i, 0) + (1.0 + p.x(i, 1)) * p.d[i] + rng.Normal();
  }
  return p;
}

ForestParams Params(int trees) {
  ForestParams f;
  f.n_trees = trees;
  f.mtry = 10;
  f.min_leaf = 5;
  f.seed = 3;
  return f;
}

void BM_RegressionForestFit(benchmark::State& state) {
  const Problem p = MakeProblem(state.range(0), 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitRegressionForest(p.x, p.y, Params(100)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RegressionForestFit)->Arg(500)->Arg(1000)->Arg(2000)
    ->Unit(benchmark::kMillisecond);

void BM_RegressionForestPredict(benchmark::State& state) {
  const Problem p = MakeProblem(1000, 30);
  const ForestModel m = FitRegressionForest(p.x, p.y, Params(100));
  for (auto _ : state) benchmark::DoNotOptimize(m.PredictAll(p.x));
}
BENCHMARK(BM_RegressionForestPredict)->Unit(benchmark::kMillisecond);

void BM_CausalForestFit(benchmark::State& state) {
  const Problem p = MakeProblem(state.range(0), 30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitCausalForest(p.x, p.y, p.d, Params(100)));
  }
}
BENCHMARK(BM_CausalForestFit)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cmlmc

BENCHMARK_MAIN();
