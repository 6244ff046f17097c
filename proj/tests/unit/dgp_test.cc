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
#include <cmath>
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "cmlmc/csv.h"
#include "cmlmc/dgp.h"
#include "cmlmc/errors.h"
#include "cmlmc/rng.h"
#include "test_util.h"

namespace cmlmc {
namespace {

SyntheticPopConfig SmallSynthetic(Index n = 20000) {
  SyntheticPopConfig c;
  c.n_population = n;
  return c;
}

PopulationOptions SmallOptions(Index n_validation = 2000) {
  PopulationOptions o;
  o.n_validation = n_validation;
  return o;
}

const Population& SharedPopulation() {
  static const Population pop =
      BuildPopulation(SmallSynthetic(), ItesSpec{}, SmallOptions(), 7);
  return pop;
}

TEST(PopulationTest, ContractsHold) {
  const Population& pop = SharedPopulation();
  EXPECT_NEAR(pop.p_full.mean(), 0.5, 1e-6);
  EXPECT_GE(pop.p_full.minCoeff(), 0.05);
  EXPECT_LE(pop.p_full.maxCoeff(), 0.95);
  const Eigen::VectorXd y1 = pop.y1();
  for (Index i = 0; i < pop.size(); ++i) {
    ASSERT_EQ(pop.ite[i], std::round(pop.ite[i]));
    ASSERT_GE(y1[i], 0.0);
    ASSERT_LE(y1[i], 33.0);
    ASSERT_EQ(pop.y0[i], std::round(pop.y0[i]));
  }
  std::vector<Index> both;
  std::set_intersection(pop.validation_ids.begin(), pop.validation_ids.end(),
                        pop.pool_ids.begin(), pop.pool_ids.end(),
                        std::back_inserter(both));
  EXPECT_TRUE(both.empty());
  EXPECT_EQ(static_cast<Index>(pop.validation_ids.size()), 2000);
  EXPECT_EQ(static_cast<Index>(pop.validation_ids.size() + pop.pool_ids.size()),
            pop.size());
  EXPECT_EQ(pop.validation_groups.size(), pop.validation_ids.size());
}

TEST(PopulationTest, BoundarySharesNearConfigured) {
  const Population& pop = SharedPopulation();
  const SyntheticPopConfig c = SmallSynthetic();
  EXPECT_NEAR(pop.info.boundary_share_zero, c.share_zero, 0.05);
  EXPECT_NEAR(pop.info.boundary_share_max, c.share_max, 0.05);
  const SyntheticData raw = GenerateSynthetic(c, 33);
  EXPECT_NEAR((raw.y0.array() == 0.0).cast<double>().mean(), c.share_zero, 0.05);
  EXPECT_NEAR((raw.y0.array() == 33.0).cast<double>().mean(), c.share_max, 0.05);
}

TEST(PopulationTest, ZeroEffectDgp) {
  ItesSpec ites;
  ites.alpha = 0.0;
  ites.noise = NoiseKind::kNone;
  const Population pop = BuildPopulation(SmallSynthetic(5000), ites, SmallOptions(1000), 3);
  EXPECT_EQ(pop.ite.cwiseAbs().maxCoeff(), 0.0);
  const TrueTargets t = ComputeTrueTargets(pop);
  EXPECT_EQ(t.ate, 0.0);
  EXPECT_EQ(t.gate.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(t.ite.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PopulationTest, TrueTargetsConsistent) {
  const Population& pop = SharedPopulation();
  const TrueTargets a = ComputeTrueTargets(pop);
  const TrueTargets b = ComputeTrueTargets(pop);
  EXPECT_EQ(a.gate, b.gate);
  EXPECT_EQ(a.ate, b.ate);
  std::vector<double> count(pop.group_names.size(), 0.0);
  for (int g : pop.validation_groups) count[g] += 1.0;
  double weighted = 0.0;
  for (std::size_t g = 0; g < count.size(); ++g) weighted += a.gate[g] * count[g];
  EXPECT_NEAR(weighted / static_cast<double>(pop.validation_ids.size()), a.ate, 1e-12);
  for (std::size_t v = 0; v < pop.validation_ids.size(); ++v) {
    EXPECT_EQ(a.ite[static_cast<Index>(v)], pop.ite[pop.validation_ids[v]]);
  }
}

// Share of units whose effect meets a bound of the outcome range: y0 or y1
// sits at 0 or y_max while the unrounded-for-bounds effect is nonzero.
double CensoringShare(const Population& pop) {
  const Eigen::VectorXd index = StandardizedEffectIndex(
      pop.p_full, pop.ites.noise, DeriveSeed(pop.seed, SeedTag::kIteNoise, 0));
  const double top = pop.ites.y_max;
  double count = 0.0;
  for (Index i = 0; i < pop.size(); ++i) {
    const double raw = std::round(pop.ites.alpha * index[i]);
    const double y0 = pop.y0[i];
    const double y1 = y0 + pop.ite[i];
    const bool at_bound = y0 == 0.0 || y0 == top || y1 == 0.0 || y1 == top;
    if (raw != 0.0 && at_bound) count += 1.0;
  }
  return count / static_cast<double>(pop.size());
}

TEST(PopulationTest, EffectCorridor) {
  const Population& pop = SharedPopulation();
  const double share = CensoringShare(pop);
  EXPECT_GE(share, 0.20);
  EXPECT_LE(share, 0.55);
  const double mean = pop.ite.mean();
  const double sd = std::sqrt((pop.ite.array() - mean).square().mean());
  EXPECT_GE(sd, 1.0);
  EXPECT_LE(sd, 3.0);
}

TEST(PopulationTest, DefaultGroupingHas64Groups) {
  const Population pop =
      BuildPopulation(SmallSynthetic(90000), ItesSpec{}, SmallOptions(10000), 11);
  const GroupAssignment g = AssignGroups(pop.data, GroupingScheme::Default());
  EXPECT_EQ(g.n_groups(), 64);
  EXPECT_EQ(static_cast<Index>(g.labels.size()), pop.size());
  EXPECT_EQ(static_cast<int>(pop.group_names.size()), 64);
}

TEST(PopulationTest, DeterministicAndSeedSensitive) {
  const Population a = BuildPopulation(SmallSynthetic(3000), ItesSpec{}, SmallOptions(500), 5);
  const Population b = BuildPopulation(SmallSynthetic(3000), ItesSpec{}, SmallOptions(500), 5);
  EXPECT_EQ(a.ite, b.ite);
  EXPECT_EQ(a.validation_ids, b.validation_ids);
  const Population c = BuildPopulation(SmallSynthetic(3000), ItesSpec{}, SmallOptions(500), 6);
  EXPECT_NE(a.validation_ids, c.validation_ids);
}

TEST(PopulationTest, CsvSourceFitsPropensityAndDropsTreated) {
  const SyntheticData raw = GenerateSynthetic(SmallSynthetic(6000), 33);
  CsvSource src;
  src.covariates = raw.covariates;
  src.outcome = raw.y0;
  src.treatment.resize(6000);
  Stream rng(8);
  for (Index i = 0; i < 6000; ++i) {
    src.treatment[i] = rng.Bernoulli(raw.p_true[i]) ? 1.0 : 0.0;
  }
  const Population pop = BuildPopulation(src, ItesSpec{}, SmallOptions(500), 9);
  const Index treated = static_cast<Index>(src.treatment.sum());
  EXPECT_EQ(pop.info.dropped_treated, treated);
  EXPECT_LE(pop.size(), 6000 - treated);
  EXPECT_NEAR(pop.p_full.mean(), 0.5, 1e-6);
  src.outcome[0] = 40.0;
  EXPECT_THROW(BuildPopulation(src, ItesSpec{}, SmallOptions(500), 9), ArgumentError);
}

TEST(ShiftTest, MeanShareAndRankingPreserved) {
  Stream rng(10);
  Eigen::VectorXd p(5000);
  for (Index i = 0; i < 5000; ++i) p[i] = 0.02 + 0.5 * rng.Uniform() * rng.Uniform();
  const Eigen::VectorXd before = p;
  ShiftToMeanShare(p, 0.5);
  EXPECT_NEAR(p.mean(), 0.5, 1e-8);
  std::vector<Index> a(5000), b(5000);
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  std::stable_sort(a.begin(), a.end(), [&](Index i, Index j) { return before[i] < before[j]; });
  std::stable_sort(b.begin(), b.end(), [&](Index i, Index j) { return p[i] < p[j]; });
  EXPECT_EQ(a, b);
}

TEST(IteTest, ZeroAlpha) {
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(100, 0.4);
  ItesSpec spec;
  spec.alpha = 0.0;
  spec.noise = NoiseKind::kNone;
  EXPECT_EQ(ComputeIte(p, Eigen::VectorXd::Constant(100, 3.0), spec, 1),
            Eigen::VectorXd::Zero(100));
  spec.alpha = 2.0;
  EXPECT_THROW(ComputeIte(p, Eigen::VectorXd::Constant(100, 3.0), spec, 1),
               ArgumentError);
}

TEST(IteTest, FormulaAndCensoringBranches) {
  Stream rng(12);
  const Index n = 5000;
  Eigen::VectorXd p(n), y0(n);
  for (Index i = 0; i < n; ++i) {
    p[i] = 0.05 + 0.9 * rng.Uniform();
    y0[i] = i % 3 == 0 ? 0.0 : (i % 3 == 1 ? 33.0 : static_cast<double>(rng.Below(34)));
  }
  ItesSpec spec;
  spec.alpha = 3.0;
  const Eigen::VectorXd xi = ComputeIte(p, y0, spec, 13);
  const Eigen::VectorXd index = StandardizedEffectIndex(p, spec.noise, 13);
  for (Index i = 0; i < n; ++i) {
    const double rounded = std::round(3.0 * index[i]);
    const double want = std::min(std::max(rounded, -y0[i]), 33.0 - y0[i]);
    ASSERT_EQ(xi[i], want);
    if (y0[i] == 33.0) ASSERT_LE(xi[i], 0.0);
    if (y0[i] == 0.0) {
      ASSERT_GE(xi[i], 0.0);
      ASSERT_FALSE(std::signbit(xi[i]));  // no negative zero
    }
  }
}

TEST(IteTest, HalfAwayFromZeroRounding) {
  // Two units: standardized index is exactly +1 and -1, so alpha 2.5 puts
  // them on the half points 2.5 and -2.5.
  Eigen::VectorXd p(2), y0(2);
  p << 0.2, 0.4;
  y0 << 10, 10;
  ItesSpec spec;
  spec.noise = NoiseKind::kNone;
  spec.alpha = 2.5;
  const Eigen::VectorXd index = StandardizedEffectIndex(p, spec.noise, 1);
  ASSERT_NEAR(std::abs(index[0]), 1.0, 1e-12);
  const Eigen::VectorXd xi = ComputeIte(p, y0, spec, 1);
  EXPECT_EQ(std::abs(xi[0]), std::abs(std::round(2.5 * index[0])));
  EXPECT_EQ(xi[0], -xi[1]);
}

TEST(IteTest, StandardizedIndexMoments) {
  Stream rng(14);
  Eigen::VectorXd p(20000);
  for (Index i = 0; i < p.size(); ++i) p[i] = 0.05 + 0.9 * rng.Uniform();
  for (NoiseKind noise : {NoiseKind::kNone, NoiseKind::kOneMinusPoisson1}) {
    const Eigen::VectorXd z = StandardizedEffectIndex(p, noise, 15);
    EXPECT_NEAR(z.mean(), 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt((z.array() - z.mean()).square().mean()), 1.0, 1e-10);
  }
}

TEST(IteTest, NoiseMoments) {
  const Index n = 100000;
  double sum = 0.0, sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    Stream rng(DeriveSeed(99, SeedTag::kIteNoise, static_cast<std::uint64_t>(i)));
    const double e = 1.0 - rng.Poisson(1.0);
    sum += e;
    sq += e * e;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.05);
}

TEST(DrawTest, Deterministic) {
  const Population& pop = SharedPopulation();
  const Sample a = DrawReplication(pop, 1000, 21);
  const Sample b = DrawReplication(pop, 1000, 21);
  EXPECT_TRUE(a.data == b.data);
  EXPECT_EQ(a.treatment, b.treatment);
  EXPECT_EQ(a.outcome, b.outcome);
  ASSERT_TRUE(a.true_ite.has_value());
  const Sample c = DrawReplication(pop, 1000, 22);
  EXPECT_NE(c.treatment, a.treatment);
  EXPECT_THROW(DrawReplication(pop, 1000000, 1), ArgumentError);
}

TEST(DrawTest, OutcomesComeFromPotentialOutcomes) {
  // Units are matched back to the pool through their covariate rows.
  const Population& pop = SharedPopulation();
  const Sample s = DrawReplication(pop, 500, 23);
  const Eigen::MatrixXd& px = pop.data.x();
  int matched = 0;
  for (Index i = 0; i < s.size(); ++i) {
    for (Index u : pop.pool_ids) {
      if (px.row(u) == s.data.x().row(i)) {
        const double want = s.treatment[i] == 1.0 ? pop.y0[u] + pop.ite[u] : pop.y0[u];
        EXPECT_EQ(s.outcome[i], want);
        EXPECT_EQ((*s.true_ite)[i], pop.ite[u]);
        ++matched;
        break;
      }
    }
    if (i >= 50) break;
  }
  EXPECT_GT(matched, 40);
}

TEST(DrawTest, RandomAssignmentShareAndBalance) {
  ItesSpec ites;
  ites.assignment = Assignment::kRandomHalf;
  const Population pop = BuildPopulation(SmallSynthetic(16000), ites, SmallOptions(1000), 31);
  int inside = 0;
  for (int r = 0; r < 100; ++r) {
    const Sample s = DrawReplication(pop, 4000, static_cast<std::uint64_t>(100 + r));
    const double share = s.treatment.mean();
    inside += share >= 0.45 && share <= 0.55;
  }
  EXPECT_GE(inside, 99);
  const Sample big = DrawReplication(pop, 10000, 5);
  const Eigen::ArrayXd d = big.treatment.array() - big.treatment.mean();
  for (Index j = 0; j < std::min<Index>(20, big.data.cols()); ++j) {
    const Eigen::ArrayXd x = big.data.x().col(j).array() - big.data.x().col(j).mean();
    const double corr = (d * x).sum() / std::sqrt((d * d).sum() * (x * x).sum());
    EXPECT_LT(std::abs(corr), 0.05) << big.data.column(j).name;
  }
}

TEST(DrawTest, SelectionFollowsPropensity) {
  const Population& pop = SharedPopulation();
  const Sample s = DrawReplication(pop, 10000, 41);
  EXPECT_NEAR(s.treatment.mean(), 0.5, 0.03);
}

TEST(GroupTest, SingleBinaryColumn) {
  const Population& pop = SharedPopulation();
  GroupingScheme scheme;
  scheme.base = {{"female", {}}};
  const GroupAssignment g = AssignGroups(pop.data, scheme);
  EXPECT_EQ(g.n_groups(), 2);
  std::vector<int> sizes(2, 0);
  for (int l : g.labels) ++sizes[l];
  EXPECT_EQ(sizes[0] + sizes[1], pop.size());
  EXPECT_GT(sizes[0], 0);
  EXPECT_GT(sizes[1], 0);
}

TEST(GroupTest, ContinuousNeedsCuts) {
  const Population& pop = SharedPopulation();
  GroupingScheme scheme;
  scheme.base = {{"age", {}}};
  EXPECT_THROW(AssignGroups(pop.data, scheme), ArgumentError);
  scheme.base = {{"no_such_column", {}}};
  EXPECT_THROW(AssignGroups(pop.data, scheme), ArgumentError);
}

TEST(GroupTest, SmallRefinedCellsMerge) {
  const Population& pop = SharedPopulation();
  GroupingScheme scheme = GroupingScheme::Default();
  scheme.min_cell_size = 1000000;
  const GroupAssignment g = AssignGroups(pop.data, scheme);
  EXPECT_EQ(g.n_groups(), 24);
  EXPECT_FALSE(g.merge_log.empty());
}

TEST(PopulationIoTest, RoundTripIsBitExact) {
  testing::TempDir dir("pop");
  const Population pop = BuildPopulation(SmallSynthetic(3000), ItesSpec{}, SmallOptions(500), 12);
  SavePopulation(pop, dir.path());
  const Population back = LoadPopulation(dir.path());
  EXPECT_TRUE(back.data == pop.data);
  EXPECT_EQ(back.y0, pop.y0);
  EXPECT_EQ(back.ite, pop.ite);
  EXPECT_EQ(back.p_full, pop.p_full);
  EXPECT_EQ(back.validation_ids, pop.validation_ids);
  EXPECT_EQ(back.pool_ids, pop.pool_ids);
  EXPECT_EQ(back.validation_groups, pop.validation_groups);
  EXPECT_EQ(back.group_names, pop.group_names);
  EXPECT_EQ(back.seed, pop.seed);
  EXPECT_EQ(back.ites.alpha, pop.ites.alpha);
  for (const char* f : {"schema.csv", "covariates.csv", "outcomes.csv", "groups.csv",
                        "group_names.csv", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::filesystem::remove(dir / "outcomes.csv");
  EXPECT_THROW(LoadPopulation(dir.path()), Error);
}

TEST(SyntheticConfigTest, Validation) {
  SyntheticPopConfig c;
  c.k_binary = 3;
  EXPECT_THROW(c.Validate(), ArgumentError);
  c = SyntheticPopConfig{};
  c.share_zero = 0.7;
  c.share_max = 0.4;
  EXPECT_THROW(c.Validate(), ArgumentError);
  ItesSpec s;
  s.alpha = -1.0;
  EXPECT_THROW(s.Validate(), ArgumentError);
}

}  // namespace
}  // namespace cmlmc
