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
#ifndef CMLMC_CONFIG_H_
#define CMLMC_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cmlmc/causal.h"
#include "cmlmc/dgp.h"
#include "cmlmc/forest.h"
#include "cmlmc/lasso.h"

namespace cmlmc {

enum class PopulationSource { kSynthetic, kCsv, kDirectory };

struct StudyConfig {
  // population.*
  PopulationSource source = PopulationSource::kSynthetic;
  std::string population_path;  // CSV file or population directory
  std::string schema_path;      // CSV mode
  std::string outcome_column = "y0";
  std::string treatment_column = "treated";
  SyntheticPopConfig synthetic;
  PopulationOptions population;
  std::uint64_t population_seed = 20190101;

  // dgp.*
  ItesSpec ites;

  // study.*
  Index n_s = 1000;
  int replications = 2000;
  std::vector<EstimatorSpec> estimators = AllEstimators();
  std::uint64_t master_seed = 1;
  std::string output_dir;
  int parallelism = 1;

  // forest.* and lasso.*
  ForestParams forest;
  LassoParams lasso;

  // Checks invariants that do not need the population (R >= 2, learner
  // compatibility, fractions, ...). Throws ArgumentError.
  void Validate() const;
  LearnerConfig ForestLearner() const;
  LearnerConfig LassoLearner() const;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys and malformed
// values throw ParseError naming the line.
StudyConfig ParseConfig(const std::string& text, const std::string& source);
StudyConfig LoadConfig(const std::filesystem::path& path);

// CMLMC_OUTPUT_DIR and CMLMC_PARALLELISM override the corresponding keys.
void ApplyEnvironmentOverrides(StudyConfig& config);

// Every key with its effective value, one per line, in a fixed order. Feeding
// the output back to ParseConfig reproduces the config.
std::string EchoConfig(const StudyConfig& config);

// Hash of the echoed config without output_dir, parallelism and forest
// threads, which do not affect results.
std::string ConfigFingerprint(const StudyConfig& config);

// FNV-1a 64-bit, hex encoded.
std::string Checksum(const std::string& bytes);

}  // namespace cmlmc

#endif  // CMLMC_CONFIG_H_
