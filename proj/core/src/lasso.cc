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
#include "cmlmc/lasso.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cmlmc/data.h"
#include "cmlmc/errors.h"
#include "cmlmc/forest.h"
#include "cmlmc/rng.h"

namespace cmlmc {

void LassoParams::Validate() const {
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) {
      throw ArgumentError("lambda grid values must be positive");
    }
    if (i > 0 && !(lambda_grid[i] < lambda_grid[i - 1])) {
      throw ArgumentError("lambda grid must be strictly descending");
    }
  }
  if (lambda_grid.empty() && n_lambda < 1) {
    throw ArgumentError("n_lambda must be positive");
  }
  if (!(lambda_min_ratio > 0.0) || lambda_min_ratio >= 1.0) {
    throw ArgumentError("lambda_min_ratio must be in (0, 1)");
  }
  if (n_folds < 2) throw ArgumentError("Lasso CV needs at least two folds");
  if (max_iter < 1) throw ArgumentError("max_iter must be positive");
  if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
}

double SoftThreshold(double z, double threshold) {
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0.0;
}

Eigen::VectorXd LassoModel::PredictLink(const Eigen::MatrixXd& x) const {
  if (x.cols() != coefficients.size()) {
    throw ArgumentError("design has " + std::to_string(x.cols()) +
                        " columns, model expects " +
                        std::to_string(coefficients.size()));
  }
  Eigen::VectorXd eta = x * coefficients;
  eta.array() += intercept;
  return eta;
}

Eigen::VectorXd LassoModel::Predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd eta = PredictLink(x);
  if (family == Family::kBinomial) {
    for (Index i = 0; i < eta.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-eta[i]));
      eta[i] = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    }
  }
  return eta;
}

int LassoModel::NonZeroCount() const {
  return static_cast<int>((coefficients.array() != 0.0).count());
}

namespace {

constexpr double kIrlsProbFloor = 1e-5;
constexpr int kMaxIrlsIterations = 100;

struct Design {
  Eigen::MatrixXd xs;       // centered and scaled copy
  Eigen::VectorXd center;   // subtracted per column
  Eigen::VectorXd scale;    // divided per column; 0 marks a dead column
  Eigen::VectorXd weights;  // raw unit weights
  double total_weight = 0.0;
  bool fit_intercept = true;
};

Design Standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& w,
                   const LassoParams& params) {
  if (x.rows() != w.size()) {
    throw ArgumentError("weight vector does not match the design rows");
  }
  if (x.cols() < 1) throw ArgumentError("Lasso needs at least one covariate");
  if ((w.array() < 0.0).any() || !w.allFinite()) {
    throw ArgumentError("Lasso weights must be finite and nonnegative");
  }
  Design d;
  d.total_weight = w.sum();
  if (!(d.total_weight > 0.0)) throw ArgumentError("Lasso weights are all zero");
  d.weights = w;
  d.fit_intercept = params.fit_intercept;
  const Index p = x.cols();
  d.xs = x;
  d.center = Eigen::VectorXd::Zero(p);
  d.scale = Eigen::VectorXd::Ones(p);
  for (Index j = 0; j < p; ++j) {
    auto col = d.xs.col(j);
    if (params.fit_intercept) {
      d.center[j] = w.dot(col) / d.total_weight;
      col.array() -= d.center[j];
    }
    const double ms = w.dot(col.cwiseProduct(col)) / d.total_weight;
    const double ref = 1.0 + d.center[j] * d.center[j];
    if (!(ms > 1e-24 * ref)) {
      d.scale[j] = 0.0;
      col.setZero();
      continue;
    }
    if (params.standardize) {
      d.scale[j] = std::sqrt(ms);
      col /= d.scale[j];
    }
  }
  return d;
}

// Coordinate-descent state on the standardized scale.
struct Fit {
  double b0 = 0.0;
  Eigen::VectorXd beta;
};

double WeightedSd(const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  bool centered) {
  const double total = w.sum();
  const double mean = centered ? w.dot(y) / total : 0.0;
  const double ms = w.dot((y.array() - mean).square().matrix()) / total;
  return std::sqrt(ms);
}

// Solves the weighted penalized least-squares problem
//   (1/(2W)) sum omega_i (z_i - b0 - xs_i beta)^2 + lambda |beta|_1
// in place, where W is the sum of the design's unit weights.
void SolveCd(const Design& d, const Eigen::VectorXd& z,
             const Eigen::VectorXd& omega, double lambda, double scale_ref,
             const LassoParams& params, Fit& fit, LassoTrace* trace) {
  const Index n = d.xs.rows();
  const Index p = d.xs.cols();
  const double inv_w = 1.0 / d.total_weight;
  const double omega_sum = omega.sum();
  Eigen::VectorXd v(p);
  for (Index j = 0; j < p; ++j) {
    v[j] = d.scale[j] == 0.0
               ? 0.0
               : omega.dot(d.xs.col(j).cwiseProduct(d.xs.col(j))) * inv_w;
  }
  Eigen::VectorXd r = z - d.xs * fit.beta;
  r.array() -= fit.b0;

  auto objective = [&]() {
    return 0.5 * inv_w * omega.dot(r.cwiseProduct(r)) +
           lambda * fit.beta.cwiseAbs().sum();
  };
  auto sweep = [&](bool active_only) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (v[j] == 0.0) continue;
      const double old = fit.beta[j];
      if (active_only && old == 0.0) continue;
      const auto col = d.xs.col(j);
      const double grad = omega.cwiseProduct(col).dot(r) * inv_w;
      const double updated = SoftThreshold(grad + v[j] * old, lambda) / v[j];
      const double delta = updated - old;
      if (delta != 0.0) {
        fit.beta[j] = updated;
        r.noalias() -= delta * col;
        max_change = std::max(max_change, v[j] * delta * delta);
      }
    }
    if (d.fit_intercept && omega_sum > 0.0) {
      const double delta = omega.dot(r) / omega_sum;
      if (delta != 0.0) {
        fit.b0 += delta;
        r.array() -= delta;
        max_change = std::max(max_change, omega_sum * inv_w * delta * delta);
      }
    }
    if (trace) trace->objective.push_back(objective());
    return max_change / (scale_ref * scale_ref);
  };

  (void)n;
  int sweeps = 0;
  double change = std::numeric_limits<double>::infinity();
  while (true) {
    change = sweep(false);
    if (++sweeps > params.max_iter) break;
    if (change < params.tol) return;
    while (true) {
      change = sweep(true);
      if (++sweeps > params.max_iter) break;
      if (change < params.tol) break;
    }
    if (sweeps > params.max_iter) break;
  }
  throw ConvergenceError("coordinate descent did not converge in " +
                             std::to_string(params.max_iter) +
                             " sweeps (last max change " +
                             std::to_string(change) + ")",
                         change);
}

Fit InitialFit(const Design& d, const Eigen::VectorXd& y, Family family) {
  Fit fit;
  fit.beta = Eigen::VectorXd::Zero(d.xs.cols());
  if (!d.fit_intercept) return fit;
  const double mean = d.weights.dot(y) / d.total_weight;
  if (family == Family::kGaussian) {
    fit.b0 = mean;
  } else {
    const double m = std::clamp(mean, kIrlsProbFloor, 1.0 - kIrlsProbFloor);
    fit.b0 = std::log(m / (1.0 - m));
  }
  return fit;
}

// Weighted cross-products for covariance-mode updates of the least-squares
// problem. With an intercept the columns are weighted-centered, so the
// intercept is the weighted mean of y and stays fixed.
struct Gram {
  Eigen::MatrixXd g;  // xs' W xs / sum(w)
  Eigen::VectorXd c;  // xs' W (y - b0) / sum(w)
  double yy = 0.0;    // (y - b0)' W (y - b0) / sum(w)
  double b0 = 0.0;
};

constexpr Index kGramMaxColumns = 500;

std::optional<Gram> MakeGram(const Design& d, const Eigen::VectorXd& y) {
  if (d.xs.cols() > kGramMaxColumns) return std::nullopt;
  Gram gm;
  gm.b0 = d.fit_intercept ? d.weights.dot(y) / d.total_weight : 0.0;
  const Eigen::VectorXd yc = y.array() - gm.b0;
  const Eigen::MatrixXd xw = d.xs.array().colwise() * d.weights.array();
  gm.g = (d.xs.transpose() * xw) / d.total_weight;
  gm.c = (xw.transpose() * yc) / d.total_weight;
  gm.yy = d.weights.dot(yc.cwiseProduct(yc)) / d.total_weight;
  return gm;
}

int SweepLimit(const LassoParams& params, int sweeps, double change) {
  if (sweeps > params.max_iter) {
    throw ConvergenceError("coordinate descent did not converge in " +
                               std::to_string(params.max_iter) +
                               " sweeps (last max change " +
                               std::to_string(change) + ")",
                           change);
  }
  return sweeps;
}

// Covariance-mode coordinate descent on the Gram matrix: each update costs
// O(p) instead of O(n).
void SolveGram(const Gram& gm, const Design& d, double lambda, double scale_var,
               const LassoParams& params, Fit& fit, LassoTrace* trace) {
  const Index p = gm.g.rows();
  fit.b0 = gm.b0;
  Eigen::VectorXd grad = gm.c - gm.g * fit.beta;
  auto objective = [&]() {
    return 0.5 * (gm.yy - 2.0 * gm.c.dot(fit.beta) +
                  fit.beta.dot(gm.g * fit.beta)) +
           lambda * fit.beta.cwiseAbs().sum();
  };
  auto sweep = [&](bool active_only) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double v = gm.g(j, j);
      if (d.scale[j] == 0.0 || !(v > 0.0)) continue;
      const double old = fit.beta[j];
      if (active_only && old == 0.0) continue;
      const double updated = SoftThreshold(grad[j] + v * old, lambda) / v;
      const double delta = updated - old;
      if (delta != 0.0) {
        fit.beta[j] = updated;
        grad.noalias() -= delta * gm.g.col(j);
        max_change = std::max(max_change, v * delta * delta);
      }
    }
    if (trace) trace->objective.push_back(objective());
    return max_change / scale_var;
  };
  int sweeps = 0;
  while (true) {
    double change = sweep(false);
    sweeps = SweepLimit(params, sweeps + 1, change);
    if (change < params.tol) return;
    do {
      change = sweep(true);
      sweeps = SweepLimit(params, sweeps + 1, change);
    } while (change >= params.tol);
  }
}

void SolveAt(const Design& d, const Eigen::VectorXd& y, const Gram* gram,
             double lambda, Family family, const LassoParams& params, Fit& fit,
             LassoTrace* trace) {
  if (family == Family::kGaussian) {
    double scale_ref = WeightedSd(y, d.weights, d.fit_intercept);
    if (!(scale_ref > 0.0)) scale_ref = 1.0;
    if (gram) {
      SolveGram(*gram, d, lambda, scale_ref * scale_ref, params, fit, trace);
    } else {
      SolveCd(d, y, d.weights, lambda, scale_ref, params, fit, trace);
    }
    return;
  }
  // Penalized IRLS. Working weights are floored so that separated data do
  // not stall; iterations are capped instead of failing.
  const Index n = y.size();
  Eigen::VectorXd omega(n), z(n);
  for (int it = 0; it < kMaxIrlsIterations; ++it) {
    Eigen::VectorXd eta = d.xs * fit.beta;
    eta.array() += fit.b0;
    for (Index i = 0; i < n; ++i) {
      double prob = 1.0 / (1.0 + std::exp(-eta[i]));
      prob = std::clamp(prob, kIrlsProbFloor, 1.0 - kIrlsProbFloor);
      const double var = prob * (1.0 - prob);
      omega[i] = d.weights[i] * var;
      z[i] = eta[i] + (y[i] - prob) / var;
    }
    const Fit before = fit;
    LassoParams inner = params;
    inner.tol = 0.1 * params.tol;
    SolveCd(d, z, omega, lambda, 1.0, inner, fit, trace);
    // Working weights are at most 1/4 of the unit weights and columns have
    // unit mean square, which bounds each v_j by 1/4.
    double change = 0.25 * (fit.b0 - before.b0) * (fit.b0 - before.b0);
    for (Index j = 0; j < fit.beta.size(); ++j) {
      const double delta = fit.beta[j] - before.beta[j];
      change = std::max(change, 0.25 * delta * delta);
    }
    if (change < params.tol) break;
  }
}

// Weighted deviance of a fit on its own design.
double Deviance(const Design& d, const Eigen::VectorXd& y, const Fit& fit,
                Family family) {
  Eigen::VectorXd eta = d.xs * fit.beta;
  eta.array() += fit.b0;
  double dev = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    if (family == Family::kGaussian) {
      const double r = y[i] - eta[i];
      dev += d.weights[i] * r * r;
    } else {
      double prob = 1.0 / (1.0 + std::exp(-eta[i]));
      prob = std::clamp(prob, kIrlsProbFloor, 1.0 - kIrlsProbFloor);
      dev -= 2.0 * d.weights[i] *
             (y[i] * std::log(prob) + (1.0 - y[i]) * std::log(1.0 - prob));
    }
  }
  return dev;
}

double ComputeLambdaMax(const Design& d, const Eigen::VectorXd& y) {
  const double mean =
      d.fit_intercept ? d.weights.dot(y) / d.total_weight : 0.0;
  const Eigen::VectorXd wr =
      d.weights.cwiseProduct((y.array() - mean).matrix());
  double best = 0.0;
  for (Index j = 0; j < d.xs.cols(); ++j) {
    if (d.scale[j] == 0.0) continue;
    best = std::max(best, std::abs(d.xs.col(j).dot(wr)) / d.total_weight);
  }
  return best;
}

std::vector<double> GridFrom(double lambda_max, const LassoParams& params) {
  if (!params.lambda_grid.empty()) return params.lambda_grid;
  if (!(lambda_max > 0.0)) return {0.0};
  std::vector<double> grid(params.n_lambda);
  if (params.n_lambda == 1) return {lambda_max};
  const double log_ratio = std::log(params.lambda_min_ratio);
  for (int k = 0; k < params.n_lambda; ++k) {
    grid[k] = lambda_max * std::exp(log_ratio * k / (params.n_lambda - 1));
  }
  return grid;
}

LassoModel ToModel(const Design& d, const Fit& fit, double lambda,
                   Family family) {
  LassoModel model;
  model.family = family;
  model.lambda_selected = lambda;
  const Index p = d.xs.cols();
  model.coefficients = Eigen::VectorXd::Zero(p);
  double shift = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (d.scale[j] == 0.0 || fit.beta[j] == 0.0) continue;
    model.coefficients[j] = fit.beta[j] / d.scale[j];
    shift += model.coefficients[j] * d.center[j];
  }
  model.intercept = fit.b0 - shift;
  return model;
}

void CheckResponse(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   Family family) {
  if (x.rows() != y.size()) {
    throw ArgumentError("response length does not match the design rows");
  }
  if (!y.allFinite()) throw ArgumentError("response has non-finite values");
  if (family == Family::kBinomial) {
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw ArgumentError("binomial Lasso needs a 0/1 response");
      }
    }
  }
}

}  // namespace

double LambdaMax(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& weights, const LassoParams& params) {
  const Design d = Standardize(x, weights, params);
  return ComputeLambdaMax(d, y);
}

std::vector<double> LambdaGrid(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& weights,
                               const LassoParams& params) {
  return GridFrom(LambdaMax(x, y, weights, params), params);
}

LassoModel FitLassoAt(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& weights, double lambda,
                      const LassoParams& params, Family family,
                      LassoTrace* trace) {
  CheckResponse(x, y, family);
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  const Design d = Standardize(x, weights, params);
  const double lambda_max = ComputeLambdaMax(d, y);
  std::optional<Gram> gram;
  if (family == Family::kGaussian) gram = MakeGram(d, y);
  const Gram* gp = gram ? &*gram : nullptr;
  Fit fit = InitialFit(d, y, family);
  // Warm-start along the default grid down to the requested value.
  LassoParams path_params = params;
  path_params.lambda_grid.clear();
  for (double l : GridFrom(lambda_max, path_params)) {
    if (l <= lambda) break;
    SolveAt(d, y, gp, l, family, params, fit, nullptr);
  }
  SolveAt(d, y, gp, lambda, family, params, fit, trace);
  LassoModel model = ToModel(d, fit, lambda, family);
  model.params = params;
  return model;
}

namespace {

constexpr std::size_t kMinPathLength = 5;
constexpr double kMaxDevRatio = 0.999;
constexpr double kMinDevGain = 1e-5;
constexpr std::size_t kCvPatience = 10;

struct PathState {
  Design d;
  Eigen::VectorXd y;
  std::optional<Gram> gram;
  Fit fit;

  PathState(Design design, Eigen::VectorXd response, Family family)
      : d(std::move(design)), y(std::move(response)) {
    if (family == Family::kGaussian) gram = MakeGram(d, y);
    fit = InitialFit(d, y, family);
  }
  void Step(double lambda, Family family, const LassoParams& params) {
    SolveAt(d, y, gram ? &*gram : nullptr, lambda, family, params, fit,
            nullptr);
  }
};

struct HeldOut {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

double HeldOutLoss(const HeldOut& h, const Eigen::VectorXd& eta, Family family) {
  double loss = 0.0;
  for (Index i = 0; i < h.y.size(); ++i) {
    if (family == Family::kGaussian) {
      const double e = h.y[i] - eta[i];
      loss += h.w[i] * e * e;
    } else {
      double prob = 1.0 / (1.0 + std::exp(-eta[i]));
      prob = std::clamp(prob, kIrlsProbFloor, 1.0 - kIrlsProbFloor);
      loss -= 2.0 * h.w[i] *
              (h.y[i] * std::log(prob) + (1.0 - h.y[i]) * std::log(1.0 - prob));
    }
  }
  return loss;
}

}  // namespace

LassoModel FitLasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& weights, const LassoParams& params,
                    Family family) {
  params.Validate();
  CheckResponse(x, y, family);
  const Index n = x.rows();
  PathState full(Standardize(x, weights, params), y, family);
  std::vector<double> grid = GridFrom(ComputeLambdaMax(full.d, y), params);

  std::vector<PathState> folds;
  std::vector<HeldOut> held_out;
  double weight_sum = 0.0;
  const SplitPlan plan =
      MakeFolds(n, params.n_folds, DeriveSeed(params.seed, SeedTag::kLassoCv, 0));
  for (int f = 0; f < params.n_folds; ++f) {
    const auto train = plan.Complement(f);
    const auto held = plan.Members(f);
    const auto nt = static_cast<Index>(train.size());
    Eigen::MatrixXd xt(nt, x.cols());
    Eigen::VectorXd yt(nt), wt(nt);
    for (Index r = 0; r < nt; ++r) {
      xt.row(r) = x.row(train[r]);
      yt[r] = y[train[r]];
      wt[r] = weights[train[r]];
    }
    if (!(wt.sum() > 0.0)) continue;
    const auto nh = static_cast<Index>(held.size());
    HeldOut h{Eigen::MatrixXd(nh, x.cols()), Eigen::VectorXd(nh),
              Eigen::VectorXd(nh)};
    for (Index r = 0; r < nh; ++r) {
      h.x.row(r) = x.row(held[r]);
      h.y[r] = y[held[r]];
      h.w[r] = weights[held[r]];
    }
    weight_sum += h.w.sum();
    folds.emplace_back(Standardize(xt, wt, params), std::move(yt), family);
    held_out.push_back(std::move(h));
  }
  if (!(weight_sum > 0.0)) throw ArgumentError("no weight in held-out folds");

  // The default grid is walked until the full-sample deviance saturates or
  // stalls, or until the CV loss has not improved for kCvPatience values.
  const bool truncate = params.lambda_grid.empty();
  const double null_dev = Deviance(full.d, y, full.fit, family);
  double prev_ratio = 0.0;
  std::vector<double> cv_loss;
  std::size_t best = 0;
  Fit best_fit;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    full.Step(grid[k], family, params);
    double loss = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      folds[f].Step(grid[k], family, params);
      const LassoModel m = ToModel(folds[f].d, folds[f].fit, grid[k], family);
      loss += HeldOutLoss(held_out[f], m.PredictLink(held_out[f].x), family);
    }
    cv_loss.push_back(loss / weight_sum);
    if (k == 0 || cv_loss[k] < cv_loss[best]) {
      best = k;
      best_fit = full.fit;
    }
    bool saturated = !(null_dev > 0.0);
    if (!saturated) {
      const double ratio = 1.0 - Deviance(full.d, y, full.fit, family) / null_dev;
      saturated = ratio > kMaxDevRatio || ratio - prev_ratio < kMinDevGain * ratio;
      prev_ratio = ratio;
    }
    if (!truncate || k + 1 < kMinPathLength) continue;
    const bool stop = saturated || k - best >= kCvPatience;
    if (stop) {
      grid.resize(k + 1);
      break;
    }
  }

  LassoModel model = ToModel(full.d, best_fit, grid[best], family);
  model.lambda_grid = std::move(grid);
  model.cv_loss = std::move(cv_loss);
  model.params = params;
  return model;
}

LassoModel FitLogisticLasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& d,
                            const LassoParams& params) {
  CheckResponse(x, d, Family::kBinomial);
  const double ones = d.sum();
  if (ones < 0.5 || ones > static_cast<double>(d.size()) - 0.5) {
    throw EstimationError("logistic Lasso needs both classes");
  }
  return FitLasso(x, d, Eigen::VectorXd::Ones(d.size()), params,
                  Family::kBinomial);
}

}  // namespace cmlmc
