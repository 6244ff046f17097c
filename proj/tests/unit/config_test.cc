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

#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include "cmlmc/config.h"
#include "cmlmc/errors.h"
#include "test_util.h"

namespace cmlmc {
namespace {

TEST(ConfigTest, DefaultsEchoAndReparse) {
  const StudyConfig def;
  const std::string echo = EchoConfig(def);
  const StudyConfig back = ParseConfig(echo, "echo");
  EXPECT_EQ(EchoConfig(back), echo);
  EXPECT_EQ(ConfigFingerprint(back), ConfigFingerprint(def));
}

TEST(ConfigTest, ExampleFileMatchesDefaults) {
  const StudyConfig c = LoadConfig(CMLMC_SOURCE_DIR "/configs/example.cfg");
  EXPECT_EQ(EchoConfig(c), EchoConfig(StudyConfig{}));
}

TEST(ConfigTest, ParsesValues) {
  const StudyConfig c = ParseConfig(
      "# comment\n"
      "study.replications = 7  \n"
      "\n"
      "study.estimators = mcm:lasso, cf:forest\n"
      "dgp.alpha = 0\n"
      "dgp.noise = none\n"
      "dgp.assignment = random_half\n"
      "lasso.standardize = false\n"
      "groups.refine_extra = age:25:50,german\n",
      "inline");
  EXPECT_EQ(c.replications, 7);
  ASSERT_EQ(c.estimators.size(), 2u);
  EXPECT_EQ(c.estimators[0].Id(), "mcm:lasso");
  EXPECT_EQ(c.estimators[1].Id(), "cf:forest");
  EXPECT_EQ(c.ites.alpha, 0.0);
  EXPECT_EQ(c.ites.noise, NoiseKind::kNone);
  EXPECT_EQ(c.ites.assignment, Assignment::kRandomHalf);
  EXPECT_FALSE(c.lasso.standardize);
  ASSERT_EQ(c.population.grouping.refine_extra.size(), 2u);
  EXPECT_EQ(c.population.grouping.refine_extra[0].cut_points,
            (std::vector<double>{25.0, 50.0}));
}

TEST(ConfigTest, ErrorsNameTheLine) {
  try {
    ParseConfig("study.n_s = 10\nstudy.bogus = 1\n", "x.cfg");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(ParseConfig("study.n_s = 10\nstudy.n_s = 11\n", "x"), ParseError);
  EXPECT_THROW(ParseConfig("study.n_s\n", "x"), ParseError);
  EXPECT_THROW(ParseConfig("study.n_s = ten\n", "x"), ParseError);
  EXPECT_THROW(ParseConfig("dgp.noise = gaussian\n", "x"), ParseError);
  EXPECT_THROW(LoadConfig("/nonexistent/cfg"), ArgumentError);
}

TEST(ConfigTest, FingerprintIgnoresOperationalKeys) {
  StudyConfig a;
  StudyConfig b = a;
  b.output_dir = "/tmp/elsewhere";
  b.parallelism = 8;
  b.forest.n_threads = 4;
  EXPECT_EQ(ConfigFingerprint(a), ConfigFingerprint(b));
  b.master_seed = 2;
  EXPECT_NE(ConfigFingerprint(a), ConfigFingerprint(b));
  StudyConfig c = a;
  c.forest.n_trees = 999;
  EXPECT_NE(ConfigFingerprint(a), ConfigFingerprint(c));
}

TEST(ConfigTest, EnvironmentOverrides) {
  StudyConfig c;
  ::setenv("CMLMC_OUTPUT_DIR", "/tmp/out_env", 1);
  ::setenv("CMLMC_PARALLELISM", "3", 1);
  ApplyEnvironmentOverrides(c);
  EXPECT_EQ(c.output_dir, "/tmp/out_env");
  EXPECT_EQ(c.parallelism, 3);
  ::setenv("CMLMC_PARALLELISM", "zero", 1);
  EXPECT_THROW(ApplyEnvironmentOverrides(c), ArgumentError);
  ::unsetenv("CMLMC_OUTPUT_DIR");
  ::unsetenv("CMLMC_PARALLELISM");
}

TEST(ConfigTest, Validate) {
  StudyConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.replications = 1;
  EXPECT_THROW(c.Validate(), ArgumentError);
  c = StudyConfig{};
  c.estimators.push_back(c.estimators.front());
  EXPECT_THROW(c.Validate(), ArgumentError);
  c = StudyConfig{};
  c.n_s = 85000;
  EXPECT_THROW(c.Validate(), ArgumentError);
  c = StudyConfig{};
  c.source = PopulationSource::kDirectory;
  EXPECT_THROW(c.Validate(), ArgumentError);
}

TEST(ChecksumTest, Stable) {
  EXPECT_EQ(Checksum(""), "cbf29ce484222325");
  EXPECT_NE(Checksum("a"), Checksum("b"));
  EXPECT_EQ(Checksum("abc").size(), 16u);
}

}  // namespace
}  // namespace cmlmc
