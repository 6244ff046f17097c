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

#include <string>

#include <gtest/gtest.h>

#include "cmlmc/errors.h"
#include "cmlmc/model_io.h"
#include "cmlmc/rng.h"
#include "test_util.h"

namespace cmlmc {
namespace {

struct Data {
  Eigen::MatrixXd x;
  Eigen::VectorXd y, d;
};

Data MakeData(Index n, std::uint64_t seed) {
  Data out{testing::NormalMatrix(n, 4, seed), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  Stream rng(seed + 1);
  for (Index i = 0; i < n; ++i) {
    out.d[i] = rng.Bernoulli(0.4 + 0.2 * (out.x(i, 0) > 0)) ? 1.0 : 0.0;
    out.y[i] = out.x(i, 1) + out.d[i] * (1.0 + out.x(i, 2)) + rng.Normal();
  }
  return out;
}

ForestParams Params() {
  ForestParams p;
  p.n_trees = 30;
  p.mtry = 3;
  p.min_leaf = 5;
  p.seed = 77;
  return p;
}

TEST(ModelIoTest, RegressionForestRoundTrip) {
  const Data data = MakeData(300, 1);
  const ForestModel m = FitRegressionForest(data.x, data.y, Params());
  const std::string text = ModelToJson(m);
  const ForestModel back = ForestFromJson(text);
  const Eigen::MatrixXd q = testing::NormalMatrix(50, 4, 2);
  EXPECT_EQ(back.PredictAll(q), m.PredictAll(q));
  EXPECT_EQ(back.params().seed, 77u);
  EXPECT_EQ(back.params().n_trees, 30);
  EXPECT_FALSE(back.is_probability());
  EXPECT_EQ(ModelToJson(back), text);
}

TEST(ModelIoTest, ProbabilityForestKeepsClamp) {
  const Data data = MakeData(300, 3);
  const ForestModel m = FitProbabilityForest(data.x, data.d, Params());
  const ForestModel back = ForestFromJson(ModelToJson(m));
  EXPECT_TRUE(back.is_probability());
  EXPECT_EQ(back.PredictAll(data.x), m.PredictAll(data.x));
  EXPECT_THROW(CausalForestFromJson(ModelToJson(m)), SchemaError);
}

TEST(ModelIoTest, CausalForestRoundTrip) {
  const Data data = MakeData(400, 4);
  for (Centering c : {Centering::kNone, Centering::kLocal}) {
    const CausalForestModel m = FitCausalForest(data.x, data.y, data.d, Params(), c);
    const CausalForestModel back = CausalForestFromJson(ModelToJson(m));
    EXPECT_EQ(back.centering(), c);
    EXPECT_EQ(back.params().seed, 77u);
    const Eigen::MatrixXd q = testing::NormalMatrix(40, 4, 5);
    EXPECT_EQ(back.PredictAll(q), m.PredictAll(q));
  }
}

TEST(ModelIoTest, LassoRoundTripThroughFile) {
  testing::TempDir dir("model");
  const Data data = MakeData(200, 6);
  LassoParams p;
  p.n_lambda = 20;
  p.n_folds = 4;
  p.seed = 9;
  const LassoModel m = FitLasso(data.x, data.y, Eigen::VectorXd::Ones(200), p);
  SaveModel(m, dir / "lasso.json");
  const LassoModel back = LoadLassoModel(dir / "lasso.json");
  EXPECT_EQ(back.Predict(data.x), m.Predict(data.x));
  EXPECT_EQ(back.lambda_selected, m.lambda_selected);
  EXPECT_EQ(back.lambda_grid, m.lambda_grid);
  EXPECT_EQ(back.cv_loss, m.cv_loss);
  EXPECT_EQ(back.params.seed, 9u);
  EXPECT_EQ(back.params.n_folds, 4);
  const LassoModel logit = FitLogisticLasso(data.x, data.d, p);
  EXPECT_EQ(LassoFromJson(ModelToJson(logit)).Predict(data.x), logit.Predict(data.x));
}

TEST(ModelIoTest, Errors) {
  EXPECT_THROW(LassoFromJson("{not json"), ParseError);
  EXPECT_THROW(LassoFromJson("{\"format\": \"other\"}"), SchemaError);
  const Data data = MakeData(100, 7);
  const ForestModel m = FitRegressionForest(data.x, data.y, Params());
  std::string text = ModelToJson(m);
  EXPECT_THROW(LassoFromJson(text), SchemaError);
  const auto pos = text.find("\"version\":1");
  ASSERT_NE(pos, std::string::npos);
  std::string bad_version = text;
  bad_version.replace(pos, 11, "\"version\":9");
  EXPECT_THROW(ForestFromJson(bad_version), SchemaError);
  std::string bad_member = text;
  const auto mem = bad_member.find("\"leaf_members\":[");
  bad_member.insert(mem + 16, "100000,");
  EXPECT_THROW(ForestFromJson(bad_member), SchemaError);
  EXPECT_THROW(LoadForestModel("/no/such/model.json"), ArgumentError);
}

}  // namespace
}  // namespace cmlmc
