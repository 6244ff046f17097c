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
#include "cmlmc/features.h"

#include <cmath>
#include <sstream>

#include "cmlmc/errors.h"

namespace cmlmc {

namespace {

Eigen::VectorXd Evaluate(const Eigen::MatrixXd& x, const FeatureTerm& term) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(x.rows());
  for (const auto& [col, exponent] : term.factors) {
    for (int e = 0; e < exponent; ++e) v.array() *= x.col(col).array();
  }
  return v;
}

ColumnKind TermKind(const std::vector<ColumnSpec>& base,
                    const FeatureTerm& term) {
  if (term.factors.size() == 1 && term.factors[0].second == 1) {
    return base[term.factors[0].first].kind;
  }
  for (const auto& f : term.factors) {
    if (base[f.first].kind != ColumnKind::kBinary) {
      return ColumnKind::kContinuous;
    }
  }
  return ColumnKind::kBinary;
}

bool IsZeroOne(const Eigen::VectorXd& v) {
  return ((v.array() == 0.0) || (v.array() == 1.0)).all();
}

std::string Format(double value) {
  std::ostringstream out;
  out.precision(4);
  out << value;
  return out.str();
}

}  // namespace

Dataset FeatureExpansion::Apply(const Dataset& data) const {
  if (static_cast<std::size_t>(data.cols()) != base_columns.size()) {
    throw SchemaError("expansion expects " +
                      std::to_string(base_columns.size()) +
                      " base columns, got " + std::to_string(data.cols()));
  }
  for (std::size_t j = 0; j < base_columns.size(); ++j) {
    if (data.column(static_cast<Index>(j)).name != base_columns[j]) {
      throw SchemaError("base column " + std::to_string(j) + " is '" +
                        data.column(static_cast<Index>(j)).name +
                        "', expected '" + base_columns[j] + "'");
    }
  }
  Eigen::MatrixXd out(data.rows(), static_cast<Index>(terms.size()));
  std::vector<ColumnSpec> specs;
  specs.reserve(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    out.col(static_cast<Index>(t)) = Evaluate(data.x(), terms[t]);
    specs.push_back({terms[t].name, TermKind(data.columns(), terms[t])});
  }
  return Dataset(std::move(out), std::move(specs));
}

std::pair<Dataset, FeatureExpansion> ExpandFeatures(const Dataset& data) {
  const auto& base = data.columns();
  const int k = static_cast<int>(data.cols());
  std::vector<FeatureTerm> candidates;
  for (int j = 0; j < k; ++j) {
    candidates.push_back({{{j, 1}}, base[j].name});
  }
  for (int j = 0; j < k; ++j) {
    for (int l = j + 1; l < k; ++l) {
      candidates.push_back(
          {{{j, 1}, {l, 1}}, base[j].name + "*" + base[l].name});
    }
  }
  for (int j = 0; j < k; ++j) {
    if (base[j].kind != ColumnKind::kContinuous) continue;
    for (int e = 2; e <= 4; ++e) {
      candidates.push_back({{{j, e}}, base[j].name + "^" + std::to_string(e)});
    }
  }

  FeatureExpansion recipe;
  for (const auto& c : base) recipe.base_columns.push_back(c.name);

  const Index n = data.rows();
  std::vector<Eigen::VectorXd> kept;  // centered, unit-norm retained columns
  for (const auto& term : candidates) {
    const Eigen::VectorXd v = Evaluate(data.x(), term);
    const double mean = v.mean();
    Eigen::VectorXd centered = v.array() - mean;
    const double norm = centered.norm();
    const double scale = std::max(v.cwiseAbs().maxCoeff(), 1.0);
    if (v.maxCoeff() == v.minCoeff() ||
        norm <= 1e-12 * scale * std::sqrt(static_cast<double>(n))) {
      recipe.drop_log.push_back({term.name, "constant"});
      continue;
    }
    if (IsZeroOne(v) && (mean < kRareBinaryShare || mean > 1.0 - kRareBinaryShare)) {
      recipe.drop_log.push_back(
          {term.name, "binary share of ones " + Format(mean) +
                          " outside [" + Format(kRareBinaryShare) + ", " +
                          Format(1.0 - kRareBinaryShare) + "]"});
      continue;
    }
    centered /= norm;
    bool collinear = false;
    for (std::size_t r = 0; r < kept.size(); ++r) {
      const double corr = centered.dot(kept[r]);
      if (std::abs(corr) > kMaxAbsCorrelation) {
        recipe.drop_log.push_back(
            {term.name, "|corr| " + Format(std::abs(corr)) + " with " +
                            recipe.terms[r].name});
        collinear = true;
        break;
      }
    }
    if (collinear) continue;
    kept.push_back(std::move(centered));
    recipe.terms.push_back(term);
  }
  Dataset expanded = recipe.Apply(data);
  return {std::move(expanded), std::move(recipe)};
}

}  // namespace cmlmc
