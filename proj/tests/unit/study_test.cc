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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cmlmc/config.h"
#include "cmlmc/errors.h"
#include "cmlmc/study.h"
#include "test_util.h"

namespace cmlmc {
namespace {

namespace fs = std::filesystem;

StudyConfig TinyConfig() {
  StudyConfig c;
  c.synthetic.n_population = 3000;
  c.population.n_validation = 300;
  c.n_s = 200;
  c.replications = 3;
  c.estimators = {EstimatorSpec::Parse("infeasible:lasso"),
                  EstimatorSpec::Parse("cmr:forest"),
                  EstimatorSpec::Parse("mcm:lasso")};
  c.forest.n_trees = 20;
  c.forest.mtry = 5;
  c.forest.min_leaf = 5;
  c.lasso.n_lambda = 20;
  c.lasso.n_folds = 3;
  return c;
}

std::string Cfg(const StudyConfig& c) { return EchoConfig(c); }

int Cli(const std::vector<std::string>& args, std::string* out = nullptr,
        std::string* err = nullptr) {
  std::vector<const char*> argv{"cmlmc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

const Population& TinyPopulation() {
  static const Population pop = ObtainPopulation(TinyConfig());
  return pop;
}

void ExpectSameValues(const StudyResult& a, const StudyResult& b) {
  ASSERT_EQ(a.replications.size(), b.replications.size());
  for (std::size_t r = 0; r < a.replications.size(); ++r) {
    for (std::size_t e = 0; e < a.estimator_ids.size(); ++e) {
      const auto& x = a.replications[r].estimators[e];
      const auto& y = b.replications[r].estimators[e];
      ASSERT_EQ(x.ok, y.ok);
      EXPECT_EQ(x.iate, y.iate);
      EXPECT_EQ(x.gate, y.gate);
      EXPECT_EQ(x.ate, y.ate);
    }
  }
}

TEST(StudyTest, NoEffectInfeasibleIsZero) {
  StudyConfig c = TinyConfig();
  c.ites.alpha = 0.0;
  c.ites.noise = NoiseKind::kNone;
  c.replications = 2;
  c.estimators = {EstimatorSpec::Parse("infeasible:forest"),
                  EstimatorSpec::Parse("infeasible:lasso")};
  const StudyResult r = RunStudy(c);
  for (std::size_t e = 0; e < 2; ++e) {
    const PredictionTensor t = r.Tensor(e, Level::kIate);
    EXPECT_EQ(t.values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(t.truth.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(StudyTest, DeterministicAcrossParallelism) {
  StudyConfig c = TinyConfig();
  const StudyResult a = RunStudy(c, TinyPopulation());
  c.parallelism = 3;
  const StudyResult b = RunStudy(c, TinyPopulation());
  ExpectSameValues(a, b);
  c.master_seed = 2;
  const StudyResult d = RunStudy(c, TinyPopulation());
  EXPECT_NE(a.replications[0].estimators[2].iate, d.replications[0].estimators[2].iate);
}

TEST(StudyTest, ResumeSkipsFinishedReplications) {
  testing::TempDir dir("resume");
  StudyConfig c = TinyConfig();
  c.output_dir = (dir / "study").string();
  const StudyResult first = RunStudy(c, TinyPopulation());
  for (const auto& rec : first.replications) EXPECT_FALSE(rec.resumed);
  const std::string iate = testing::ReadFile(dir / "study/iate.csv");

  fs::remove(dir / "study/rep_000001.csv");
  const StudyResult second = RunStudy(c, TinyPopulation());
  EXPECT_TRUE(second.replications[0].resumed);
  EXPECT_FALSE(second.replications[1].resumed);
  EXPECT_TRUE(second.replications[2].resumed);
  ExpectSameValues(first, second);
  EXPECT_EQ(testing::ReadFile(dir / "study/iate.csv"), iate);
}

TEST(StudyTest, CorruptedReplicationIsRecomputed) {
  testing::TempDir dir("corrupt");
  StudyConfig c = TinyConfig();
  c.output_dir = (dir / "study").string();
  const StudyResult first = RunStudy(c, TinyPopulation());
  std::string text = testing::ReadFile(dir / "study/rep_000002.csv");
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  testing::WriteFile(dir / "study/rep_000002.csv", text);
  const StudyResult second = RunStudy(c, TinyPopulation());
  EXPECT_FALSE(second.replications[2].resumed);
  ExpectSameValues(first, second);
}

TEST(StudyTest, RefusesDifferentFingerprint) {
  testing::TempDir dir("fp");
  StudyConfig c = TinyConfig();
  c.replications = 2;
  c.output_dir = (dir / "study").string();
  RunStudy(c, TinyPopulation());
  c.master_seed = 99;
  try {
    RunStudy(c, TinyPopulation());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("fingerprint"), std::string::npos);
  }
  // Operational keys do not change the fingerprint.
  c.master_seed = TinyConfig().master_seed;
  c.parallelism = 2;
  EXPECT_NO_THROW(RunStudy(c, TinyPopulation()));
}

TEST(StudyTest, FailuresAreRecordedAndMarked) {
  StudyConfig c = TinyConfig();
  c.replications = 10;
  c.estimators = {EstimatorSpec::Parse("infeasible:lasso"),
                  EstimatorSpec::Parse("mcm:lasso")};
  StudyHooks hooks;
  hooks.before_estimate = [](const EstimatorSpec& spec, int r) {
    if (spec.Id() == "mcm:lasso" && (r == 3 || r == 7)) {
      throw EstimationError("injected");
    }
  };
  const StudyResult res = RunStudy(c, TinyPopulation(), hooks);
  EXPECT_EQ(res.Failures(0), 0);
  EXPECT_EQ(res.Failures(1), 2);
  EXPECT_EQ(res.replications[3].estimators[1].error, "injected");
  EXPECT_EQ(res.Tensor(1, Level::kIate).replications(), 8);
  const auto rows = BuildReport(res, Level::kIate);
  EXPECT_FALSE(rows[0].unreliable);
  EXPECT_TRUE(rows[1].unreliable);
  EXPECT_EQ(rows[1].failures, 2);
  EXPECT_EQ(rows[1].replications, 8);
}

TEST(StudyTest, BestFlagsSurviveCsv) {
  testing::TempDir dir("best");
  StudyConfig c = TinyConfig();
  c.output_dir = (dir / "study").string();
  const StudyResult res = RunStudy(c, TinyPopulation());
  for (Level level : {Level::kIate, Level::kGate, Level::kAte}) {
    const auto rows = BuildReport(res, level);
    const auto flags =
        ReadBestFlags(dir / "study" / (std::string(LevelName(level)) + ".csv"));
    ASSERT_EQ(flags.size(), rows.size());
    int n_best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_EQ(flags[i], rows[i].best);
      n_best += rows[i].best;
    }
    EXPECT_GE(n_best, 1);
  }
}

TEST(StudyTest, ReportFromDiskMatchesRun) {
  testing::TempDir dir("report");
  StudyConfig c = TinyConfig();
  c.output_dir = (dir / "study").string();
  RunStudy(c, TinyPopulation());
  const StudyResult loaded = LoadStudyResult(dir / "study");
  WriteReports(loaded, dir / "again");
  for (const char* f : {"iate.csv", "gate.csv", "ate.csv", "tables.txt"}) {
    EXPECT_EQ(testing::ReadFile(dir / "again" / f),
              testing::ReadFile(dir / "study" / f))
        << f;
  }
}

TEST(CliTest, ValidateConfig) {
  std::string out;
  EXPECT_EQ(Cli({"validate-config", "-c", CMLMC_SOURCE_DIR "/configs/example.cfg"}, &out), 0);
  EXPECT_EQ(out, EchoConfig(StudyConfig{}));
}

TEST(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({"--no-such-flag"}), 2);
  EXPECT_EQ(Cli({"run"}), 2);
  EXPECT_EQ(Cli({}), 2);
  std::string out;
  EXPECT_EQ(Cli({"--help"}, &out), 0);
  EXPECT_NE(out.find("run"), std::string::npos);
}

TEST(CliTest, MissingPopulationNamesPath) {
  testing::TempDir dir("missing");
  StudyConfig c = TinyConfig();
  c.source = PopulationSource::kDirectory;
  c.population_path = "/no/such/population";
  testing::WriteFile(dir / "c.cfg", Cfg(c));
  std::string err;
  EXPECT_EQ(Cli({"run", "-c", (dir / "c.cfg").string(), "-o", (dir / "out").string()},
                nullptr, &err),
            1);
  EXPECT_NE(err.find("/no/such/population"), std::string::npos) << err;
}

TEST(CliTest, BuildRunReport) {
  testing::TempDir dir("cli");
  StudyConfig c = TinyConfig();
  c.replications = 2;
  testing::WriteFile(dir / "build.cfg", Cfg(c));
  ASSERT_EQ(Cli({"build-pop", "-c", (dir / "build.cfg").string(), "-o",
                 (dir / "pop").string()}),
            0);
  c.source = PopulationSource::kDirectory;
  c.population_path = (dir / "pop").string();
  testing::WriteFile(dir / "run.cfg", Cfg(c));
  std::string out;
  ASSERT_EQ(Cli({"run", "-c", (dir / "run.cfg").string(), "-o",
                 (dir / "study").string(), "-j", "2"},
                &out),
            0);
  EXPECT_NE(out.find("2 replications"), std::string::npos) << out;
  for (const char* f : {"iate.csv", "gate.csv", "ate.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "study" / f)) << f;
  }
  ASSERT_EQ(Cli({"report", "-d", (dir / "study").string(), "-o",
                 (dir / "rep").string()}),
            0);
  EXPECT_EQ(testing::ReadFile(dir / "rep/tables.txt"),
            testing::ReadFile(dir / "study/tables.txt"));

  // Same population in memory gives the same numbers as the saved one.
  StudyConfig mem = TinyConfig();
  mem.replications = 2;
  const StudyResult direct = RunStudy(mem);
  const StudyResult loaded = LoadStudyResult(dir / "study");
  ExpectSameValues(direct, loaded);
}

}  // namespace
}  // namespace cmlmc
