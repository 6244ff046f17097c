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

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "cmlmc/csv.h"
#include "cmlmc/data.h"
#include "cmlmc/errors.h"
#include "cmlmc/rng.h"
#include "test_util.h"

namespace cmlmc {
namespace {

using testing::TempDir;
using testing::WriteFile;

std::vector<ColumnSpec> TwoColumnSchema() {
  return {{"x1", ColumnKind::kContinuous}, {"x2", ColumnKind::kBinary}};
}

TEST(LoadCsvTest, ReadsThreeRows) {
  TempDir dir("csv");
  WriteFile(dir / "d.csv", "x1,x2\n0.5,1\n-2,0\n3.25,1\n");
  const Dataset d = LoadCsv(dir / "d.csv", TwoColumnSchema());
  EXPECT_EQ(d.rows(), 3);
  EXPECT_EQ(d.cols(), 2);
  EXPECT_EQ(d.x()(2, 0), 3.25);
  EXPECT_EQ(d.column(1).kind, ColumnKind::kBinary);
}

TEST(LoadCsvTest, MissingCellNamesRow) {
  TempDir dir("csv");
  WriteFile(dir / "d.csv", "x1,x2\n0.5,1\nNA,0\n");
  try {
    LoadCsv(dir / "d.csv", TwoColumnSchema());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("data row 2"), std::string::npos)
        << e.what();
  }
}

TEST(LoadCsvTest, MalformedNumberReportsLine) {
  TempDir dir("csv");
  WriteFile(dir / "d.csv", "x1,x2\n0.5,1\n1.2.3,0\n");
  try {
    LoadCsv(dir / "d.csv", TwoColumnSchema());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("d.csv:3"), std::string::npos)
        << e.what();
  }
}

TEST(LoadCsvTest, NonBinaryValueInBinaryColumn) {
  TempDir dir("csv");
  WriteFile(dir / "d.csv", "x1,x2\n0.5,2\n");
  EXPECT_THROW(LoadCsv(dir / "d.csv", TwoColumnSchema()), SchemaError);
}

TEST(LoadCsvTest, HeaderMissingSchemaColumn) {
  TempDir dir("csv");
  WriteFile(dir / "d.csv", "x1,x3\n0.5,1\n");
  EXPECT_THROW(LoadCsv(dir / "d.csv", TwoColumnSchema()), SchemaError);
}

TEST(LoadCsvTest, RoundTripIsBitExact) {
  TempDir dir("csv");
  Eigen::MatrixXd x = testing::NormalMatrix(100, 10, 11);
  x.col(3) = x.col(3).array().exp() * 1e-300;  // subnormal-adjacent values
  x.col(4) *= 1e250;
  std::vector<ColumnSpec> cols;
  for (int j = 0; j < 10; ++j) {
    cols.push_back({"c" + std::to_string(j), ColumnKind::kContinuous});
  }
  for (Index i = 0; i < 100; ++i) x(i, 9) = i % 3 == 0 ? 1.0 : 0.0;
  cols[9].kind = ColumnKind::kBinary;
  const Dataset d(x, cols);
  WriteCsv(dir / "r.csv", d);
  const Dataset back = LoadCsv(dir / "r.csv", cols);
  EXPECT_TRUE(back == d);
  EXPECT_EQ(back.x(), d.x());
}

TEST(DatasetTest, RejectsNonFinite) {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Dataset(x, {{"a", ColumnKind::kContinuous}}), SchemaError);
}

TEST(DatasetTest, RejectsEmpty) {
  EXPECT_THROW(Dataset(Eigen::MatrixXd(0, 1), {{"a", ColumnKind::kContinuous}}),
               ArgumentError);
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  Stream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.Normal() * std::pow(10.0, rng.Below(40) - 20.0);
    EXPECT_EQ(ParseDouble(FormatDouble(v), "test"), v);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
}

void ExpectPartition(const SplitPlan& plan, Index n) {
  std::set<Index> seen;
  std::size_t smallest = n, largest = 0;
  for (const auto& members : plan.Members()) {
    smallest = std::min(smallest, members.size());
    largest = std::max(largest, members.size());
    for (Index i : members) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(static_cast<Index>(seen.size()), n);
  EXPECT_LE(largest - smallest, 1u);
}

TEST(MakeFoldsTest, SingletonFolds) {
  const SplitPlan plan = MakeFolds(10, 10, 3);
  for (const auto& m : plan.Members()) EXPECT_EQ(m.size(), 1u);
  ExpectPartition(plan, 10);
}

TEST(MakeFoldsTest, TwoFoldsOfFive) {
  const SplitPlan plan = MakeFolds(10, 2, 3);
  EXPECT_EQ(plan.Members(0).size(), 5u);
  EXPECT_EQ(plan.Members(1).size(), 5u);
}

TEST(MakeFoldsTest, UnevenSizesAndDeterminism) {
  const SplitPlan a = MakeFolds(101, 10, 99);
  const SplitPlan b = MakeFolds(101, 10, 99);
  EXPECT_EQ(a.fold, b.fold);
  std::vector<std::size_t> sizes;
  for (const auto& m : a.Members()) sizes.push_back(m.size());
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(std::count(sizes.begin(), sizes.end(), 10u), 9);
  EXPECT_EQ(sizes.back(), 11u);
  EXPECT_NE(MakeFolds(101, 10, 100).fold, a.fold);
}

TEST(MakeFoldsTest, TooManyFolds) {
  EXPECT_THROW(MakeFolds(5, 6, 1), ArgumentError);
  EXPECT_THROW(MakeFolds(5, 1, 1), ArgumentError);
}

TEST(MakeFoldsTest, PartitionProperty) {
  for (Index n : {2, 3, 17, 64, 999}) {
    for (int k : {2, 3, 10}) {
      if (k > n) continue;
      ExpectPartition(MakeFolds(n, k, static_cast<std::uint64_t>(n * k)), n);
    }
  }
}

TEST(SplitHalfTest, Sizes) {
  const SplitPlan four = SplitHalf(4, 1);
  EXPECT_EQ(four.Members(0).size(), 2u);
  EXPECT_EQ(four.Members(1).size(), 2u);
  const SplitPlan five = SplitHalf(5, 1);
  EXPECT_EQ(five.Members(0).size(), 3u);
  EXPECT_EQ(five.Members(1).size(), 2u);
  EXPECT_THROW(SplitHalf(1, 1), ArgumentError);
}

TEST(SplitHalfTest, StableAndMirrored) {
  const SplitPlan a = SplitHalf(1000, 77);
  EXPECT_EQ(a.fold, SplitHalf(1000, 77).fold);
  ExpectPartition(a, 1000);
  const SplitPlan m = SplitHalf(1000, 77, true);
  for (Index i = 0; i < 1000; ++i) EXPECT_EQ(m.fold[i], 1 - a.fold[i]);
}

TEST(SampleTest, ValidateCatchesMismatch) {
  Sample s;
  s.data = testing::ContinuousData(Eigen::MatrixXd::Zero(3, 1));
  s.treatment = Eigen::VectorXd::Zero(3);
  s.outcome = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(s.Validate(), ArgumentError);
  s.outcome = Eigen::VectorXd::Zero(3);
  s.treatment[1] = 0.5;
  EXPECT_THROW(s.Validate(), ArgumentError);
}

TEST(RngTest, CounterBasedAndDerived) {
  Stream a(DeriveSeed(1, SeedTag::kTree, 4));
  Stream b(DeriveSeed(1, SeedTag::kTree, 4));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.Next(), b.Next());
  EXPECT_NE(DeriveSeed(1, SeedTag::kTree, 4), DeriveSeed(1, SeedTag::kTree, 5));
  EXPECT_NE(DeriveSeed(1, SeedTag::kTree, 4), DeriveSeed(1, SeedTag::kFolds, 4));
  Stream c(9);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = c.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

}  // namespace
}  // namespace cmlmc
