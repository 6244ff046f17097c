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

#include <cmath>

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "cmlmc/data.h"
#include "cmlmc/lasso.h"
#include "cmlmc/rng.h"

namespace cmlmc {
namespace {

void Make(Index n, Index k, Eigen::MatrixXd* x, Eigen::VectorXd* y,
          Eigen::VectorXd* d) {
  Stream rng(23);
  x->resize(n, k);
  y->resize(n);
  d->resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) (*x)(i, j) = rng.Normal();
    (*y)[i] = (*x)(i, 0) - 0.5 * (*x)(i, 1) + rng.Normal();
    (*d)[i] = rng.Bernoulli(1.0 / (1.0 + std::exp(-(*x)(i, 2)))) ? 1.0 : 0.0;
  }
}

LassoParams Params() {
  LassoParams p;
  p.seed = 5;
  return p;
}

void BM_LassoCv(benchmark::State& state) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y, d;
  Make(1000, state.range(0), &x, &y, &d);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(x.rows());
  for (auto _ : state) benchmark::DoNotOptimize(FitLasso(x, y, w, Params()));
}
BENCHMARK(BM_LassoCv)->Arg(50)->Arg(170)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_LogisticLassoCv(benchmark::State& state) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y, d;
  Make(1000, state.range(0), &x, &y, &d);
  for (auto _ : state) benchmark::DoNotOptimize(FitLogisticLasso(x, d, Params()));
}
BENCHMARK(BM_LogisticLassoCv)->Arg(50)->Arg(170)->Unit(benchmark::kMillisecond);

void BM_LassoSingleLambda(benchmark::State& state) {
  Eigen::MatrixXd x;
  Eigen::VectorXd y, d;
  Make(1000, 170, &x, &y, &d);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(x.rows());
  const double lmax = LambdaMax(x, y, w, Params());
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitLassoAt(x, y, w, 0.01 * lmax, Params()));
  }
}
BENCHMARK(BM_LassoSingleLambda)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cmlmc
