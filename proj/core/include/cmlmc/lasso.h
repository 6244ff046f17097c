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
#ifndef CMLMC_LASSO_H_
#define CMLMC_LASSO_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace cmlmc {

enum class Family { kGaussian, kBinomial };

struct LassoParams {
  // Explicit descending positive grid; empty means n_lambda log-spaced
  // values from lambda_max down to lambda_min_ratio * lambda_max.
  std::vector<double> lambda_grid;
  int n_lambda = 100;
  double lambda_min_ratio = 1e-3;
  int n_folds = 10;
  // Cap on coordinate-descent sweeps per lambda.
  int max_iter = 100000;
  // Convergence threshold on the largest coefficient change per sweep,
  // max_j v_j * (delta beta_j)^2 with v_j the weighted mean square of
  // column j, relative to the weighted variance of the response. Invariant
  // to rescaling y.
  double tol = 1e-7;
  bool standardize = true;
  bool fit_intercept = true;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct LassoModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // original covariate scale
  double lambda_selected = 0.0;
  Family family = Family::kGaussian;
  // Grid actually searched. The default grid is cut short once the explained
  // deviance saturates or the CV loss stops improving.
  std::vector<double> lambda_grid;
  std::vector<double> cv_loss;  // mean CV loss per grid value, if CV ran
  LassoParams params;           // as passed to the fit

  // Linear predictor intercept + x * beta.
  Eigen::VectorXd PredictLink(const Eigen::MatrixXd& x) const;
  // Gaussian: the linear predictor. Binomial: probability clamped to
  // [0.01, 0.99].
  Eigen::VectorXd Predict(const Eigen::MatrixXd& x) const;
  int NonZeroCount() const;
};

// Per-sweep objective values, for checking monotone descent.
struct LassoTrace {
  std::vector<double> objective;
};

// Smallest lambda at which every slope is zero:
// max_j |sum_i w_i x~_ij (y_i - ybar_w)| / sum_i w_i on the (standardized)
// design.
double LambdaMax(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& weights, const LassoParams& params);

std::vector<double> LambdaGrid(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights,
                               const LassoParams& params);

// Minimizes (1/(2W)) sum_i w_i (y_i - b0 - x_i b)^2 + lambda * |b|_1 at a
// single lambda >= 0 (binomial: the penalized mean negative log-likelihood),
// warm-starting along a short path from lambda_max. Throws ConvergenceError
// if a coordinate-descent solve exceeds max_iter sweeps.
LassoModel FitLassoAt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& weights, double lambda,
                      const LassoParams& params,
                      Family family = Family::kGaussian,
                      LassoTrace* trace = nullptr);

// Full path + n_folds cross-validation on weighted loss (squared error or
// deviance); selects the lambda with minimum mean CV loss and returns the
// full-sample solution at that lambda.
LassoModel FitLasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& weights, const LassoParams& params,
                    Family family = Family::kGaussian);

// Penalized logistic regression with unit weights. Requires both classes.
// Separation does not fail: iterations are capped and predictions clamped.
LassoModel FitLogisticLasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& d,
                            const LassoParams& params);

// sign(z) * max(|z| - threshold, 0)
double SoftThreshold(double z, double threshold);

}  // namespace cmlmc

#endif  // CMLMC_LASSO_H_
