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
#ifndef CMLMC_FEATURES_H_
#define CMLMC_FEATURES_H_

#include <string>
#include <utility>
#include <vector>

#include "cmlmc/data.h"

namespace cmlmc {

// A generated column: product of base columns raised to exponents.
struct FeatureTerm {
  std::vector<std::pair<int, int>> factors;  // (base column, exponent)
  std::string name;
};

struct DroppedTerm {
  std::string name;
  std::string reason;
};

// Recipe mapping base covariates to the expanded Lasso design. Learned on
// one dataset, applied unchanged to others (e.g. a validation sample).
struct FeatureExpansion {
  std::vector<std::string> base_columns;
  std::vector<FeatureTerm> terms;  // retained, in output column order
  std::vector<DroppedTerm> drop_log;

  Dataset Apply(const Dataset& data) const;
};

inline constexpr double kRareBinaryShare = 0.01;
inline constexpr double kMaxAbsCorrelation = 0.99;

// Base columns, all pairwise interactions, and powers 2-4 of continuous
// columns. Then drops constant terms, binary-valued terms with a share of
// ones below 1% or above 99%, and any term whose |corr| with an already
// retained term exceeds 0.99. Every drop is logged.
std::pair<Dataset, FeatureExpansion> ExpandFeatures(const Dataset& data);

}  // namespace cmlmc

#endif  // CMLMC_FEATURES_H_
