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
#ifndef CMLMC_STUDY_H_
#define CMLMC_STUDY_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmlmc/config.h"
#include "cmlmc/dgp.h"
#include "cmlmc/metrics.h"

namespace cmlmc {

struct EstimatorOutcome {
  bool ok = false;
  std::string error;
  Eigen::VectorXd iate;
  Eigen::VectorXd gate;
  double ate = 0.0;
  double seconds = 0.0;  // wall clock, excluded from determinism
};

struct ReplicationRecord {
  int replication = 0;  // 0-based
  std::vector<EstimatorOutcome> estimators;  // config.estimators order
  bool resumed = false;
};

struct StudyResult {
  StudyConfig config;
  std::vector<std::string> estimator_ids;
  TrueTargets truth;
  std::vector<std::string> group_names;
  std::vector<ReplicationRecord> replications;  // ordered by replication

  // Rows of successful replications only.
  PredictionTensor Tensor(std::size_t estimator, Level level) const;
  int Failures(std::size_t estimator) const;
};

// Failure share above which a report row is marked unreliable.
inline constexpr double kUnreliableFailureShare = 0.10;

struct StudyHooks {
  // Called before each estimator runs; throwing simulates a failure.
  std::function<void(const EstimatorSpec&, int replication)> before_estimate;
};

// Builds or loads the population named by the config, then runs the
// replication loop. When config.output_dir is set, each replication is
// persisted as it completes and a rerun resumes from verified files; a
// directory written under a different config is refused.
StudyResult RunStudy(const StudyConfig& config, const StudyHooks& hooks = {});
StudyResult RunStudy(const StudyConfig& config, const Population& population,
                     const StudyHooks& hooks = {});

// Population named by the config (synthetic, CSV or saved directory).
Population ObtainPopulation(const StudyConfig& config);

// Per-level report rows, one per estimator, with best flags applied.
std::vector<PerformanceReport> BuildReport(const StudyResult& result,
                                           Level level);

// iate.csv, gate.csv, ate.csv with the eleven measure columns, plus an
// aligned text rendering in tables.txt.
void WriteReports(const StudyResult& result, const std::filesystem::path& dir);
std::string ReportCsv(const std::vector<PerformanceReport>& rows, Level level);
std::string ReportTable(const std::vector<PerformanceReport>& rows,
                        Level level);
// Reads the 'best' column of a written report.
std::vector<bool> ReadBestFlags(const std::filesystem::path& csv);

// Reloads a study directory written by RunStudy.
StudyResult LoadStudyResult(const std::filesystem::path& dir);

// Command line entry point. Returns 0 on success, 1 on a config or runtime
// error, 2 on usage errors.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace cmlmc

#endif  // CMLMC_STUDY_H_
