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
#ifndef CMLMC_DGP_H_
#define CMLMC_DGP_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmlmc/data.h"

namespace cmlmc {

enum class NoiseKind { kNone, kOneMinusPoisson1 };
enum class Assignment { kSelection, kRandomHalf };

const char* NoiseKindName(NoiseKind n);
const char* AssignmentName(Assignment a);
NoiseKind ParseNoiseKind(const std::string& text);
Assignment ParseAssignment(const std::string& text);

struct ItesSpec {
  double alpha = 2.0;
  NoiseKind noise = NoiseKind::kOneMinusPoisson1;
  Assignment assignment = Assignment::kSelection;
  int y_max = 33;

  void Validate() const;
};

// Parameters of the built-in covariate and non-treated outcome generator.
// Column layout: employability (ordered 1..3), age plus further continuous
// columns, then female, foreigner, qualified, german plus further binaries.
struct SyntheticPopConfig {
  Index n_population = 90000;
  int k_continuous = 8;  // includes age
  int k_binary = 8;      // includes the four grouping indicators
  // Logistic propensity on standardized covariates. Empty means the
  // built-in pattern; otherwise one coefficient per covariate.
  std::vector<double> propensity_coefficients;
  double propensity_intercept = -0.3;
  // Non-treated outcome: latent index on standardized covariates plus
  // N(0, outcome_noise_sd^2), mapped by rank to {0..y_max} with point
  // masses at the bounds.
  double share_zero = 0.30;
  double share_max = 0.10;
  double outcome_noise_sd = 1.0;
  std::uint64_t seed = 20190101;

  void Validate() const;
};

struct SyntheticData {
  Dataset covariates;
  Eigen::VectorXd y0;
  Eigen::VectorXd p_true;  // before the share manipulation
};

SyntheticData GenerateSynthetic(const SyntheticPopConfig& config, int y_max);

// Grouping variable: discrete columns group by value; continuous columns
// need cut points (bins are (-inf,c0), [c0,c1), ..., [c_last, inf)).
struct GroupingVar {
  std::string column;
  std::vector<double> cut_points;
};

struct GroupingScheme {
  std::vector<GroupingVar> base;
  // Optional refinement of the cells where 'refine_column' equals
  // 'refine_value' by further variables.
  std::optional<std::string> refine_column;
  double refine_value = 0.0;
  std::vector<GroupingVar> refine_extra;
  // Refined cells with fewer units are folded back into their parent cell.
  int min_cell_size = 1;

  // Employability x female x foreigner x qualified, with medium
  // employability further split by age (<30, 30-40, >40) x german.
  static GroupingScheme Default();
};

struct GroupAssignment {
  std::vector<int> labels;             // dense 0..G-1
  std::vector<std::string> names;      // per label, e.g. "employability=2|..."
  std::vector<std::string> merge_log;  // empty refined cells folded back
  int n_groups() const { return static_cast<int>(names.size()); }
};

// Cross-tabulates the scheme's variables. Cells that end up empty do not
// receive a label. A refined cell smaller than min_cell_size is merged into
// its parent cell and the merge is logged. Labels follow the sorted order of
// the cell keys.
GroupAssignment AssignGroups(const Dataset& data, const GroupingScheme& scheme);

struct PopulationBuildInfo {
  double intercept_shift = 0.0;
  int trim_rounds = 0;
  Index trimmed = 0;
  Index dropped_treated = 0;
  double boundary_share_zero = 0.0;
  double boundary_share_max = 0.0;
};

// Semi-synthetic universe: non-treated covariates and outcomes, propensity,
// true effects, validation reservation and groups of the validation units.
struct Population {
  Dataset data;
  Eigen::VectorXd y0;
  Eigen::VectorXd p_full;  // shifted to mean 0.5, inside [0.05, 0.95]
  Eigen::VectorXd ite;     // integer valued, 0 <= y0 + ite <= y_max
  std::vector<Index> validation_ids;  // ascending
  std::vector<Index> pool_ids;        // ascending, disjoint from validation
  std::vector<int> validation_groups; // per validation unit
  std::vector<std::string> group_names;
  ItesSpec ites;
  std::uint64_t seed = 0;
  PopulationBuildInfo info;
  std::vector<std::string> log;

  Index size() const { return data.rows(); }
  Eigen::VectorXd y1() const { return y0 + ite; }
};

inline constexpr double kTrimLow = 0.05;
inline constexpr double kTrimHigh = 0.95;
inline constexpr double kTargetShare = 0.5;

struct CsvSource {
  Dataset covariates;
  Eigen::VectorXd outcome;
  Eigen::VectorXd treatment;
};

struct PopulationOptions {
  Index n_validation = 10000;
  GroupingScheme grouping = GroupingScheme::Default();
  double trim_low = kTrimLow;
  double trim_high = kTrimHigh;
  double target_share = kTargetShare;
};

// Synthetic mode: the generator's propensity is the truth.
Population BuildPopulation(const SyntheticPopConfig& source,
                           const ItesSpec& ites, const PopulationOptions& opts,
                           std::uint64_t seed);
// Data mode: fits a logistic propensity on all rows, drops the treated, then
// proceeds as in synthetic mode. Outcomes must lie in [0, y_max].
Population BuildPopulation(const CsvSource& source, const ItesSpec& ites,
                           const PopulationOptions& opts, std::uint64_t seed);

// Shifts logit(p) by a constant (Newton, tol 1e-8) so the mean is 'target'.
// Returns the shift.
double ShiftToMeanShare(Eigen::VectorXd& p, double target);

// omega = sin(1.25 pi p / max p) + eps with eps ~ 1 - Poisson(1) drawn per
// unit, standardized to mean 0 and variance 1 (1/n normalization). Throws
// ArgumentError when omega is constant.
Eigen::VectorXd StandardizedEffectIndex(const Eigen::VectorXd& p,
                                        NoiseKind noise, std::uint64_t seed);

// True effects: omega = sin(1.25 pi p / max p) + eps, standardized, scaled by
// alpha, rounded half away from zero, then censored so y0 + xi stays in
// [0, y_max]. With alpha = 0 the effects are identically zero.
Eigen::VectorXd ComputeIte(const Eigen::VectorXd& p, const Eigen::VectorXd& y0,
                           const ItesSpec& spec, std::uint64_t seed);

// Uniform draw of n_s pool units without replacement, D ~ Bernoulli(p)
// (0.5 under random assignment), Y = D y1 + (1 - D) y0. The sample carries
// the true effects for the infeasible benchmark.
Sample DrawReplication(const Population& pop, Index n_s, std::uint64_t seed);

struct TrueTargets {
  Eigen::VectorXd ite;   // validation units
  Eigen::VectorXd gate;  // per group
  double ate = 0.0;
};

TrueTargets ComputeTrueTargets(const Population& pop);

// Validation covariates in validation_ids order.
Dataset ValidationData(const Population& pop);

// Directory layout: schema.csv, covariates.csv, outcomes.csv
// (id,y0,ite,p), groups.csv (id,validation,group), group_names.csv,
// manifest.json. Round-trips bit-exactly.
void SavePopulation(const Population& pop, const std::filesystem::path& dir);
Population LoadPopulation(const std::filesystem::path& dir);

// Newton-Raphson logistic regression with intercept (unpenalized).
Eigen::VectorXd FitLogisticRegression(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& d,
                                      double* intercept);

}  // namespace cmlmc

#endif  // CMLMC_DGP_H_
