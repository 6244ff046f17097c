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
#include "cmlmc/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmlmc/errors.h"

namespace cmlmc {

using Eigen::Index;

const char* LevelName(Level level) {
  switch (level) {
    case Level::kIate: return "iate";
    case Level::kGate: return "gate";
    case Level::kAte: return "ate";
  }
  return "?";
}

void PredictionTensor::Validate() const {
  if (values.cols() != truth.size()) {
    throw ArgumentError("tensor has " + std::to_string(values.cols()) +
                        " units but the truth has " +
                        std::to_string(truth.size()));
  }
  if (values.rows() < 1 || values.cols() < 1) {
    throw ArgumentError("empty prediction tensor");
  }
  if (!values.allFinite() || !truth.allFinite()) {
    throw ArgumentError("prediction tensor contains non-finite values");
  }
}

UnitMeasures PerUnitMeasures(const PredictionTensor& tensor) {
  tensor.Validate();
  const Index r = tensor.replications();
  if (r < 2) throw ArgumentError("per-unit measures need at least two replications");
  const Index n = tensor.units();
  UnitMeasures m;
  m.mse.resize(n);
  m.abs_bias.resize(n);
  m.bias.resize(n);
  m.sd.resize(n);
  const double inv_r = 1.0 / static_cast<double>(r);
  for (Index v = 0; v < n; ++v) {
    const auto col = tensor.values.col(v);
    const double mean = col.sum() * inv_r;
    const double truth = tensor.truth[v];
    m.bias[v] = mean - truth;
    m.abs_bias[v] = std::abs(m.bias[v]);
    m.sd[v] = std::sqrt((col.array() - mean).square().sum() * inv_r);
    m.mse[v] = (col.array() - truth).square().sum() * inv_r;
  }
  return m;
}

JarqueBeraResult JarqueBera(std::span<const double> samples) {
  const auto n = samples.size();
  if (n < static_cast<std::size_t>(kJarqueBeraMinSamples)) {
    throw ArgumentError("Jarque-Bera needs at least " +
                        std::to_string(kJarqueBeraMinSamples) + " values");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean *= inv_n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double s : samples) {
    const double d = s - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 *= inv_n;
  m3 *= inv_n;
  m4 *= inv_n;
  JarqueBeraResult out;
  if (!(m2 > 1e-20 * std::max(1.0, mean * mean))) {
    out.degenerate = true;
    return out;
  }
  out.skewness = m3 / std::pow(m2, 1.5);
  out.kurtosis = m4 / (m2 * m2);
  const double excess = out.kurtosis - 3.0;
  out.statistic = static_cast<double>(n) / 6.0 *
                  (out.skewness * out.skewness + 0.25 * excess * excess);
  out.p_value = std::exp(-0.5 * out.statistic);
  return out;
}

Eigen::VectorXd ReplicationMse(const PredictionTensor& tensor) {
  tensor.Validate();
  const Eigen::MatrixXd err =
      tensor.values.rowwise() - tensor.truth.transpose();
  return err.array().square().rowwise().mean();
}

double LowerMedian(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of an empty set");
  const auto k = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k),
                   values.end());
  return values[k];
}

namespace {

double PopulationVariance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().mean();
}

bool HasVariance(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return PopulationVariance(v) > 1e-20 * std::max(1.0, mean * mean);
}

}  // namespace

PerformanceReport Summarize(const PredictionTensor& tensor, Level level) {
  const UnitMeasures m = PerUnitMeasures(tensor);
  const Index r = tensor.replications();
  const Index n = tensor.units();
  PerformanceReport rep;
  rep.replications = static_cast<int>(r);
  rep.mean_mse = m.mse.mean();
  rep.median_mse = LowerMedian(std::vector<double>(m.mse.begin(), m.mse.end()));
  rep.mean_abs_bias = m.abs_bias.mean();
  rep.mean_bias = m.bias.mean();
  rep.mean_sd = m.sd.mean();

  const Eigen::VectorXd mse_r = ReplicationMse(tensor);
  rep.se_mean_mse = std::sqrt(PopulationVariance(mse_r) / static_cast<double>(r));

  if (r >= kJarqueBeraMinSamples) {
    int rejected = 0, valid = 0;
    double skew = 0.0, kurt = 0.0;
    std::vector<double> column(static_cast<std::size_t>(r));
    JarqueBeraResult last;
    for (Index v = 0; v < n; ++v) {
      for (Index i = 0; i < r; ++i) column[i] = tensor.values(i, v);
      last = JarqueBera(column);
      if (last.degenerate) {
        ++rep.jb_degenerate;
        continue;
      }
      ++valid;
      if (last.p_value < kJarqueBeraLevel) ++rejected;
      skew += last.skewness;
      kurt += last.kurtosis;
    }
    if (valid > 0) {
      rep.mean_skew = skew / valid;
      rep.mean_kurt = kurt / valid;
      if (level == Level::kAte) {
        rep.jb = last.p_value;
      } else {
        rep.jb = static_cast<double>(rejected) / valid;
      }
    }
  }

  if (n >= 2 && HasVariance(tensor.truth)) {
    const double truth_var = PopulationVariance(tensor.truth);
    const double truth_mean = tensor.truth.mean();
    double corr = 0.0, ratio = 0.0;
    for (Index i = 0; i < r; ++i) {
      const Eigen::VectorXd pred = tensor.values.row(i).transpose();
      const double pred_var = PopulationVariance(pred);
      ratio += pred_var / truth_var;
      if (HasVariance(pred)) {
        const double cov = ((pred.array() - pred.mean()) *
                            (tensor.truth.array() - truth_mean))
                               .mean();
        corr += cov / std::sqrt(pred_var * truth_var);
      }
    }
    rep.corr = corr / static_cast<double>(r);
    rep.var_ratio = ratio / static_cast<double>(r);
  }
  return rep;
}

void FlagBest(std::vector<PerformanceReport>& rows) {
  const PerformanceReport* best = nullptr;
  for (auto& row : rows) {
    row.best = false;
    if (row.replications == 0 || !std::isfinite(row.mean_mse)) continue;
    if (!best || row.mean_mse < best->mean_mse) best = &row;
  }
  if (!best) return;
  const double bound = best->mean_mse + 2.0 * best->se_mean_mse;
  for (auto& row : rows) {
    if (row.replications == 0 || !std::isfinite(row.mean_mse)) continue;
    row.best = row.mean_mse <= bound;
  }
}

}  // namespace cmlmc
