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
#ifndef CMLMC_METRICS_H_
#define CMLMC_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmlmc {

enum class Level { kIate, kGate, kAte };
const char* LevelName(Level level);

// values(r, v): prediction for target v in replication r.
struct PredictionTensor {
  Eigen::MatrixXd values;
  Eigen::VectorXd truth;

  Eigen::Index replications() const { return values.rows(); }
  Eigen::Index units() const { return values.cols(); }
  void Validate() const;
};

struct UnitMeasures {
  Eigen::VectorXd mse;
  Eigen::VectorXd abs_bias;
  Eigen::VectorXd bias;  // mean prediction minus truth
  Eigen::VectorXd sd;    // 1/R normalization
};

// Requires R >= 2.
UnitMeasures PerUnitMeasures(const PredictionTensor& tensor);

struct JarqueBeraResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // raw (3 for a normal)
  bool degenerate = false;
};

inline constexpr int kJarqueBeraMinSamples = 8;
inline constexpr double kJarqueBeraLevel = 0.05;

// JB = n/6 (S^2 + (K-3)^2/4) with 1/n moments; p-value exp(-JB/2) (the
// chi-square(2) upper tail). A sample with zero variance is flagged
// degenerate. Requires at least 8 values.
JarqueBeraResult JarqueBera(std::span<const double> samples);

// One row of a performance table; optional columns print as "-".
struct PerformanceReport {
  std::string estimator;
  double mean_mse = 0.0;
  double se_mean_mse = 0.0;
  double median_mse = 0.0;
  double mean_abs_bias = 0.0;
  double mean_bias = 0.0;
  double mean_sd = 0.0;
  // IATE/GATE: share of units whose JB test rejects at 5%. ATE: p-value.
  std::optional<double> jb;
  std::optional<double> mean_skew;
  std::optional<double> mean_kurt;
  std::optional<double> corr;
  std::optional<double> var_ratio;
  int jb_degenerate = 0;
  int replications = 0;
  int failures = 0;
  bool unreliable = false;
  bool best = false;
};

// Means and medians of the per-unit measures over units, the standard error
// of the mean MSE from the spread of replication-level MSE_r, JB summaries,
// and replication-level correlation and variance ratio against the truth.
// corr/var_ratio are absent when the truth has no variance; JB columns are
// absent with fewer than 8 replications.
PerformanceReport Summarize(const PredictionTensor& tensor, Level level);

// Replication-level MSE_r = mean over units of squared errors.
Eigen::VectorXd ReplicationMse(const PredictionTensor& tensor);

// Flags the lowest mean MSE and every row within two SE (of the best row) of
// it.
void FlagBest(std::vector<PerformanceReport>& rows);

// Lower median for even counts.
double LowerMedian(std::vector<double> values);

}  // namespace cmlmc

#endif  // CMLMC_METRICS_H_
