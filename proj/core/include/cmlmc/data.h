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
#ifndef CMLMC_DATA_H_
#define CMLMC_DATA_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmlmc {

using Index = Eigen::Index;

enum class ColumnKind { kBinary, kOrdered, kContinuous };

const char* ColumnKindName(ColumnKind kind);
// Accepts "binary", "ordered" (alias "ordered-discrete"), "continuous".
ColumnKind ParseColumnKind(const std::string& text);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
};

// Dense covariate matrix with per-column metadata. Validated on
// construction: finite entries, binary columns in {0,1}, n >= 1, k >= 1.
// Immutable afterwards.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Eigen::MatrixXd x, std::vector<ColumnSpec> columns);

  Index rows() const { return x_.rows(); }
  Index cols() const { return x_.cols(); }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec& column(Index j) const { return columns_[j]; }
  // Position of the named column, or nullopt.
  std::optional<Index> FindColumn(const std::string& name) const;

  Dataset SelectRows(std::span<const Index> rows) const;

  bool operator==(const Dataset& other) const;

 private:
  Eigen::MatrixXd x_;
  std::vector<ColumnSpec> columns_;
};

// One replication's estimation data. true_ite is only present for samples
// drawn from a simulated population.
struct Sample {
  Dataset data;
  Eigen::VectorXd treatment;  // 0/1
  Eigen::VectorXd outcome;
  std::optional<Eigen::VectorXd> true_ite;

  Index size() const { return data.rows(); }
  // Throws ArgumentError on length mismatch or non-binary treatment.
  void Validate() const;
  Index treated_count() const;
  Sample SelectRows(std::span<const Index> rows) const;
};

// Assignment of n units to folds 0..n_folds-1.
struct SplitPlan {
  std::vector<int> fold;
  int n_folds = 0;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(fold.size()); }
  // Indices per fold, each in ascending order.
  std::vector<std::vector<Index>> Members() const;
  std::vector<Index> Members(int f) const;
  std::vector<Index> Complement(int f) const;
};

// Uniform random partition into n_folds folds whose sizes differ by at most
// one. Requires 2 <= n_folds <= n.
SplitPlan MakeFolds(Index n, int n_folds, std::uint64_t seed);

// Two folds of sizes ceil(n/2) and floor(n/2). With mirror=true the fold
// labels are swapped, which is how cross-fitting symmetry is exercised.
SplitPlan SplitHalf(Index n, std::uint64_t seed, bool mirror = false);

struct PredictionSet {
  Eigen::VectorXd iate;
  Eigen::VectorXd gate;
  double ate = 0.0;
  std::string estimator_id;
  int replication_id = 0;
};

}  // namespace cmlmc

#endif  // CMLMC_DATA_H_
