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
#include "cmlmc/data.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {

const char* ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kBinary:
      return "binary";
    case ColumnKind::kOrdered:
      return "ordered";
    case ColumnKind::kContinuous:
      return "continuous";
  }
  return "?";
}

ColumnKind ParseColumnKind(const std::string& text) {
  if (text == "binary") return ColumnKind::kBinary;
  if (text == "ordered" || text == "ordered-discrete") {
    return ColumnKind::kOrdered;
  }
  if (text == "continuous") return ColumnKind::kContinuous;
  throw ParseError("unknown column kind '" + text + "'");
}

Dataset::Dataset(Eigen::MatrixXd x, std::vector<ColumnSpec> columns)
    : x_(std::move(x)), columns_(std::move(columns)) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw ArgumentError("dataset needs at least one row and one column");
  }
  if (static_cast<Index>(columns_.size()) != x_.cols()) {
    throw ArgumentError("dataset has " + std::to_string(x_.cols()) +
                        " columns but " + std::to_string(columns_.size()) +
                        " column specs");
  }
  for (Index j = 0; j < x_.cols(); ++j) {
    const bool binary = columns_[j].kind == ColumnKind::kBinary;
    for (Index i = 0; i < x_.rows(); ++i) {
      const double v = x_(i, j);
      if (!std::isfinite(v)) {
        throw SchemaError("non-finite value in column '" + columns_[j].name +
                          "' at row " + std::to_string(i));
      }
      if (binary && v != 0.0 && v != 1.0) {
        throw SchemaError("binary column '" + columns_[j].name +
                          "' holds value " + std::to_string(v) + " at row " +
                          std::to_string(i));
      }
    }
  }
}

std::optional<Index> Dataset::FindColumn(const std::string& name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return static_cast<Index>(j);
  }
  return std::nullopt;
}

Dataset Dataset::SelectRows(std::span<const Index> rows) const {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), x_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Index>(r)) = x_.row(rows[r]);
  }
  return Dataset(std::move(out), columns_);
}

bool Dataset::operator==(const Dataset& other) const {
  if (columns_.size() != other.columns_.size()) return false;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name != other.columns_[j].name ||
        columns_[j].kind != other.columns_[j].kind) {
      return false;
    }
  }
  return x_.rows() == other.x_.rows() && x_ == other.x_;
}

void Sample::Validate() const {
  const Index n = data.rows();
  if (treatment.size() != n || outcome.size() != n) {
    throw ArgumentError("sample vectors do not match the covariate rows");
  }
  if (true_ite && true_ite->size() != n) {
    throw ArgumentError("true effect vector does not match the sample size");
  }
  for (Index i = 0; i < n; ++i) {
    if (treatment[i] != 0.0 && treatment[i] != 1.0) {
      throw ArgumentError("treatment must be 0/1 (row " + std::to_string(i) +
                          ")");
    }
    if (!std::isfinite(outcome[i])) {
      throw ArgumentError("non-finite outcome at row " + std::to_string(i));
    }
  }
}

Index Sample::treated_count() const {
  return static_cast<Index>(treatment.sum() + 0.5);
}

Sample Sample::SelectRows(std::span<const Index> rows) const {
  Sample out;
  out.data = data.SelectRows(rows);
  const auto n = static_cast<Index>(rows.size());
  out.treatment.resize(n);
  out.outcome.resize(n);
  if (true_ite) out.true_ite = Eigen::VectorXd(n);
  for (Index r = 0; r < n; ++r) {
    out.treatment[r] = treatment[rows[r]];
    out.outcome[r] = outcome[rows[r]];
    if (true_ite) (*out.true_ite)[r] = (*true_ite)[rows[r]];
  }
  return out;
}

std::vector<std::vector<Index>> SplitPlan::Members() const {
  std::vector<std::vector<Index>> out(n_folds);
  for (std::size_t i = 0; i < fold.size(); ++i) {
    out[fold[i]].push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> SplitPlan::Members(int f) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> SplitPlan::Complement(int f) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(static_cast<Index>(i));
  }
  return out;
}

namespace {

std::vector<Index> Permutation(Index n, std::uint64_t key) {
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  Stream stream(key);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(stream.Below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

SplitPlan MakeFolds(Index n, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ArgumentError("need at least two folds");
  if (n_folds > n) {
    throw ArgumentError("cannot split " + std::to_string(n) + " units into " +
                        std::to_string(n_folds) + " folds");
  }
  SplitPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.fold.assign(n, 0);
  const auto perm = Permutation(n, DeriveSeed(seed, SeedTag::kFolds, n));
  for (Index pos = 0; pos < n; ++pos) {
    plan.fold[perm[pos]] = static_cast<int>(pos % n_folds);
  }
  return plan;
}

SplitPlan SplitHalf(Index n, std::uint64_t seed, bool mirror) {
  if (n < 2) throw ArgumentError("half split needs at least two units");
  SplitPlan plan;
  plan.n_folds = 2;
  plan.seed = seed;
  plan.fold.assign(n, 0);
  const auto perm = Permutation(n, DeriveSeed(seed, SeedTag::kHalfSplit, n));
  const Index first = (n + 1) / 2;
  for (Index pos = 0; pos < n; ++pos) {
    const int f = pos < first ? 0 : 1;
    plan.fold[perm[pos]] = mirror ? 1 - f : f;
  }
  return plan;
}

}  // namespace cmlmc
