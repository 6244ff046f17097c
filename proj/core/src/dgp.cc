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
#include "cmlmc/dgp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "cmlmc/causal.h"
#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {

const char* NoiseKindName(NoiseKind n) {
  return n == NoiseKind::kNone ? "none" : "one_minus_poisson1";
}

const char* AssignmentName(Assignment a) {
  return a == Assignment::kSelection ? "selection" : "random_half";
}

NoiseKind ParseNoiseKind(const std::string& text) {
  if (text == "none") return NoiseKind::kNone;
  if (text == "one_minus_poisson1") return NoiseKind::kOneMinusPoisson1;
  throw ArgumentError("unknown noise kind '" + text + "'");
}

Assignment ParseAssignment(const std::string& text) {
  if (text == "selection") return Assignment::kSelection;
  if (text == "random_half") return Assignment::kRandomHalf;
  throw ArgumentError("unknown assignment '" + text + "'");
}

void ItesSpec::Validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("alpha must be a finite nonnegative number");
  }
  if (y_max < 1) throw ArgumentError("y_max must be positive");
}

void SyntheticPopConfig::Validate() const {
  if (n_population < 10) throw ArgumentError("n_population must be at least 10");
  if (k_continuous < 1) {
    throw ArgumentError("k_continuous must be at least 1 (age)");
  }
  if (k_binary < 4) {
    throw ArgumentError("k_binary must be at least 4 (female, foreigner, "
                        "qualified, german)");
  }
  const auto k = static_cast<std::size_t>(1 + k_continuous + k_binary);
  if (!propensity_coefficients.empty() && propensity_coefficients.size() != k) {
    throw ArgumentError("propensity_coefficients needs " + std::to_string(k) +
                        " values, got " +
                        std::to_string(propensity_coefficients.size()));
  }
  if (!(share_zero >= 0.0) || !(share_max >= 0.0) ||
      !(share_zero + share_max < 1.0)) {
    throw ArgumentError("boundary shares must be nonnegative and sum to less "
                        "than one");
  }
  if (!(outcome_noise_sd >= 0.0)) {
    throw ArgumentError("outcome_noise_sd must be nonnegative");
  }
}

namespace {

constexpr int kFactors = 3;

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double Logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

// Latent structure of one covariate: factor, loading, and (for binaries)
// the threshold on the standardized latent.
struct LatentSpec {
  int factor;
  double loading;
  double threshold;
};

// Thresholds give shares of ones of about 0.45, 0.25, 0.60, 0.70 for the
// named binaries, then 0.50, 0.30, 0.20, 0.10 cycling.
constexpr double kNamedThresholds[] = {0.1257, 0.6745, -0.2533, -0.5244};
constexpr double kExtraThresholds[] = {0.0, 0.5244, 0.8416, 1.2816};
constexpr double kExtraLoadings[] = {0.9, 0.5, 0.2, 0.7};

std::vector<LatentSpec> LatentLayout(const SyntheticPopConfig& c) {
  std::vector<LatentSpec> out;
  out.push_back({0, 0.7, 0.0});  // employability
  out.push_back({1, 0.6, 0.0});  // age
  for (int j = 1; j < c.k_continuous; ++j) {
    out.push_back({j % kFactors, kExtraLoadings[j % 4], 0.0});
  }
  out.push_back({2, 0.3, kNamedThresholds[0]});   // female
  out.push_back({1, -0.5, kNamedThresholds[1]});  // foreigner
  out.push_back({0, 0.6, kNamedThresholds[2]});   // qualified
  out.push_back({1, 0.7, kNamedThresholds[3]});   // german
  for (int j = 4; j < c.k_binary; ++j) {
    out.push_back({j % kFactors, kExtraLoadings[j % 4], kExtraThresholds[j % 4]});
  }
  return out;
}

std::vector<ColumnSpec> SyntheticSchema(const SyntheticPopConfig& c) {
  std::vector<ColumnSpec> cols;
  cols.push_back({"employability", ColumnKind::kOrdered});
  cols.push_back({"age", ColumnKind::kContinuous});
  for (int j = 1; j < c.k_continuous; ++j) {
    cols.push_back({"cont" + std::to_string(j), ColumnKind::kContinuous});
  }
  for (const char* name : {"female", "foreigner", "qualified", "german"}) {
    cols.push_back({name, ColumnKind::kBinary});
  }
  for (int j = 4; j < c.k_binary; ++j) {
    cols.push_back({"bin" + std::to_string(j - 3), ColumnKind::kBinary});
  }
  return cols;
}

double ContinuousMap(int j, double z) {
  switch (j % 3) {
    case 0: return std::exp(0.5 * z);
    case 1: return z;
    default: return 10.0 * NormalCdf(z);
  }
}

Eigen::MatrixXd StandardizedColumns(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x;
  for (Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    out.col(j).array() -= mean;
    const double sd = std::sqrt(out.col(j).squaredNorm() / x.rows());
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

std::vector<double> DefaultPropensityCoefficients(Index k) {
  std::vector<double> beta(k);
  for (Index j = 0; j < k; ++j) {
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    beta[j] = sign * 0.5 / (1.0 + 0.5 * static_cast<double>(j));
  }
  return beta;
}

std::vector<double> OutcomeCoefficients(Index k) {
  std::vector<double> gamma(k);
  gamma[0] = 0.8;  // employability
  gamma[1] = -0.3;  // age
  for (Index j = 2; j < k; ++j) {
    const double sign = j % 3 == 0 ? -1.0 : 1.0;
    gamma[j] = sign * 0.3 / (1.0 + 0.25 * static_cast<double>(j));
  }
  return gamma;
}

}  // namespace

SyntheticData GenerateSynthetic(const SyntheticPopConfig& config, int y_max) {
  config.Validate();
  if (y_max < 2) throw ArgumentError("y_max must be at least 2");
  const Index n = config.n_population;
  const auto layout = LatentLayout(config);
  const auto schema = SyntheticSchema(config);
  const auto k = static_cast<Index>(schema.size());
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd outcome_noise(n);
  for (Index i = 0; i < n; ++i) {
    Stream rng(DeriveSeed(config.seed, SeedTag::kPopulationUnit,
                          static_cast<std::uint64_t>(i)));
    double f[kFactors];
    for (double& v : f) v = rng.Normal();
    for (Index j = 0; j < k; ++j) {
      const LatentSpec& s = layout[j];
      const double z = s.loading * f[s.factor] +
                       std::sqrt(1.0 - s.loading * s.loading) * rng.Normal();
      switch (schema[j].kind) {
        case ColumnKind::kOrdered:
          x(i, j) = z < -0.6 ? 1.0 : (z < 0.9 ? 2.0 : 3.0);
          break;
        case ColumnKind::kContinuous:
          x(i, j) = j == 1 ? 18.0 + 47.0 * NormalCdf(z)
                           : ContinuousMap(static_cast<int>(j), z);
          break;
        case ColumnKind::kBinary:
          x(i, j) = z > s.threshold ? 1.0 : 0.0;
          break;
      }
    }
    outcome_noise[i] = config.outcome_noise_sd * rng.Normal();
  }

  const Eigen::MatrixXd xs = StandardizedColumns(x);
  const std::vector<double> beta =
      config.propensity_coefficients.empty()
          ? DefaultPropensityCoefficients(k)
          : config.propensity_coefficients;
  const std::vector<double> gamma = OutcomeCoefficients(k);
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), k);
  const Eigen::Map<const Eigen::VectorXd> g(gamma.data(), k);

  SyntheticData out;
  out.p_true = (xs * b).array() + config.propensity_intercept;
  for (Index i = 0; i < n; ++i) out.p_true[i] = Logistic(out.p_true[i]);

  // Rank-map the latent index onto {0..y_max} with the configured masses.
  const Eigen::VectorXd latent = xs * g + outcome_noise;
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index c) { return latent[a] < latent[c]; });
  out.y0.resize(n);
  const double interior = 1.0 - config.share_zero - config.share_max;
  for (Index r = 0; r < n; ++r) {
    const double u = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
    double y;
    if (u < config.share_zero) {
      y = 0.0;
    } else if (u >= 1.0 - config.share_max) {
      y = y_max;
    } else {
      const double v = (u - config.share_zero) / interior;
      y = std::clamp(1.0 + std::floor(v * (y_max - 1)), 1.0,
                     static_cast<double>(y_max - 1));
    }
    out.y0[order[r]] = y;
  }
  out.covariates = Dataset(std::move(x), schema);
  return out;
}

double ShiftToMeanShare(Eigen::VectorXd& p, double target) {
  if (p.size() == 0) throw ArgumentError("empty propensity vector");
  if (!(target > 0.0 && target < 1.0)) {
    throw ArgumentError("target share must be in (0, 1)");
  }
  if (!((p.array() > 0.0) && (p.array() < 1.0)).all()) {
    throw ArgumentError("propensities must lie strictly inside (0, 1)");
  }
  const Eigen::ArrayXd logit = (p.array() / (1.0 - p.array())).log();
  auto mean_at = [&](double s, double* slope) {
    double m = 0.0, d = 0.0;
    for (Index i = 0; i < logit.size(); ++i) {
      const double q = Logistic(logit[i] + s);
      m += q;
      d += q * (1.0 - q);
    }
    if (slope) *slope = d / static_cast<double>(logit.size());
    return m / static_cast<double>(logit.size()) - target;
  };
  // Newton with a bisection safeguard; f is increasing in s.
  double lo = -50.0, hi = 50.0, s = 0.0;
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double f = mean_at(s, &slope);
    if (std::abs(f) < 1e-12) break;
    (f > 0.0 ? hi : lo) = s;
    double next = slope > 0.0 ? s - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) < 1e-15) break;
    s = next;
  }
  for (Index i = 0; i < p.size(); ++i) p[i] = Logistic(logit[i] + s);
  return s;
}

Eigen::VectorXd StandardizedEffectIndex(const Eigen::VectorXd& p,
                                        NoiseKind noise, std::uint64_t seed) {
  const Index n = p.size();
  if (n == 0) throw ArgumentError("empty population");
  if (!(p.array() > 0.0).all()) throw ArgumentError("propensities must be positive");
  const double p_max = p.maxCoeff();
  Eigen::VectorXd omega(n);
  for (Index i = 0; i < n; ++i) {
    omega[i] = std::sin(1.25 * std::numbers::pi * p[i] / p_max);
    if (noise == NoiseKind::kOneMinusPoisson1) {
      Stream rng(DeriveSeed(seed, SeedTag::kIteNoise, static_cast<std::uint64_t>(i)));
      omega[i] += 1.0 - rng.Poisson(1.0);
    }
  }
  const double mean = omega.mean();
  const double sd =
      std::sqrt((omega.array() - mean).square().sum() / static_cast<double>(n));
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    throw ArgumentError("effect index has zero variance (degenerate "
                        "propensity); alpha must be 0");
  }
  return (omega.array() - mean) / sd;
}

Eigen::VectorXd ComputeIte(const Eigen::VectorXd& p, const Eigen::VectorXd& y0,
                           const ItesSpec& spec, std::uint64_t seed) {
  spec.Validate();
  const Index n = p.size();
  if (y0.size() != n) throw ArgumentError("p and y0 lengths differ");
  if (n == 0) throw ArgumentError("empty population");
  if (!(p.array() > 0.0).all()) throw ArgumentError("propensities must be positive");
  if (!((y0.array() >= 0.0) && (y0.array() <= spec.y_max)).all()) {
    throw ArgumentError("y0 must lie in [0, y_max]");
  }
  if (spec.alpha == 0.0) return Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd index = StandardizedEffectIndex(p, spec.noise, seed);
  Eigen::VectorXd xi(n);
  for (Index i = 0; i < n; ++i) {
    const double rounded = std::round(spec.alpha * index[i]);  // half away from zero
    xi[i] = std::clamp(rounded, -y0[i], spec.y_max - y0[i]) + 0.0;
  }
  return xi;
}

namespace {

std::vector<Index> DrawWithoutReplacement(const std::vector<Index>& from,
                                          Index count, std::uint64_t key) {
  std::vector<Index> pool = from;
  Stream rng(key);
  for (Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Index>(
                           rng.Below(static_cast<std::uint64_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Population Finish(Dataset data, Eigen::VectorXd y0, Eigen::VectorXd p,
                  const ItesSpec& ites, const PopulationOptions& opts,
                  std::uint64_t seed, PopulationBuildInfo info,
                  std::vector<std::string> log) {
  ites.Validate();
  if (!(opts.trim_low >= 0.0 && opts.trim_low < opts.trim_high &&
        opts.trim_high <= 1.0)) {
    throw ArgumentError("trim bounds must satisfy 0 <= low < high <= 1");
  }
  // Shift and trim until the mean share holds with every unit inside the
  // trimming bounds.
  std::vector<Index> keep(static_cast<std::size_t>(data.rows()));
  std::iota(keep.begin(), keep.end(), Index{0});
  constexpr int kMaxRounds = 100;
  bool stable = false;
  for (int round = 0; round < kMaxRounds; ++round) {
    info.intercept_shift += ShiftToMeanShare(p, opts.target_share);
    std::vector<Index> inside;
    for (Index i = 0; i < p.size(); ++i) {
      if (p[i] >= opts.trim_low && p[i] <= opts.trim_high) inside.push_back(i);
    }
    if (static_cast<Index>(inside.size()) == p.size()) {
      stable = true;
      break;
    }
    ++info.trim_rounds;
    info.trimmed += p.size() - static_cast<Index>(inside.size());
    if (inside.empty()) throw ArgumentError("trimming removed every unit");
    Eigen::VectorXd p_next(static_cast<Index>(inside.size()));
    std::vector<Index> keep_next(inside.size());
    for (std::size_t r = 0; r < inside.size(); ++r) {
      p_next[static_cast<Index>(r)] = p[inside[r]];
      keep_next[r] = keep[inside[r]];
    }
    p = std::move(p_next);
    keep = std::move(keep_next);
  }
  if (!stable) throw ArgumentError("propensity shift and trim did not settle");
  log.push_back("intercept shift " + std::to_string(info.intercept_shift) +
                ", trimmed " + std::to_string(info.trimmed) + " units in " +
                std::to_string(info.trim_rounds) + " rounds");

  Population pop;
  pop.data = data.SelectRows(keep);
  pop.y0.resize(static_cast<Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pop.y0[static_cast<Index>(r)] = y0[keep[r]];
  }
  pop.p_full = std::move(p);
  pop.ites = ites;
  pop.seed = seed;
  pop.ite = ComputeIte(pop.p_full, pop.y0, ites,
                       DeriveSeed(seed, SeedTag::kIteNoise, 0));
  const Index n = pop.size();
  info.boundary_share_zero = (pop.y0.array() == 0.0).cast<double>().mean();
  info.boundary_share_max =
      (pop.y0.array() == static_cast<double>(ites.y_max)).cast<double>().mean();

  if (opts.n_validation < 1 || opts.n_validation >= n) {
    throw ArgumentError("n_validation (" + std::to_string(opts.n_validation) +
                        ") must be between 1 and the population size after "
                        "trimming (" + std::to_string(n) + ") minus one");
  }
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  pop.validation_ids = DrawWithoutReplacement(
      all, opts.n_validation, DeriveSeed(seed, SeedTag::kValidation, 0));
  std::vector<char> is_validation(static_cast<std::size_t>(n), 0);
  for (Index i : pop.validation_ids) is_validation[i] = 1;
  for (Index i = 0; i < n; ++i) {
    if (!is_validation[i]) pop.pool_ids.push_back(i);
  }
  const GroupAssignment groups =
      AssignGroups(ValidationData(pop), opts.grouping);
  pop.validation_groups = groups.labels;
  pop.group_names = groups.names;
  for (const auto& m : groups.merge_log) log.push_back(m);
  pop.info = info;
  pop.log = std::move(log);
  return pop;
}

}  // namespace

Population BuildPopulation(const SyntheticPopConfig& source,
                           const ItesSpec& ites, const PopulationOptions& opts,
                           std::uint64_t seed) {
  ites.Validate();
  SyntheticData gen = GenerateSynthetic(source, ites.y_max);
  PopulationBuildInfo info;
  std::vector<std::string> log;
  log.push_back("synthetic population of " + std::to_string(source.n_population) +
                " units");
  return Finish(std::move(gen.covariates), std::move(gen.y0),
                std::move(gen.p_true), ites, opts, seed, info, std::move(log));
}

Population BuildPopulation(const CsvSource& source, const ItesSpec& ites,
                           const PopulationOptions& opts, std::uint64_t seed) {
  ites.Validate();
  const Index n = source.covariates.rows();
  if (source.outcome.size() != n || source.treatment.size() != n) {
    throw ArgumentError("outcome and treatment must match the covariate rows");
  }
  for (Index i = 0; i < n; ++i) {
    if (source.treatment[i] != 0.0 && source.treatment[i] != 1.0) {
      throw SchemaError("treatment column must be 0/1 (row " +
                        std::to_string(i + 1) + ")");
    }
  }
  double intercept = 0.0;
  const Eigen::VectorXd beta =
      FitLogisticRegression(source.covariates.x(), source.treatment, &intercept);
  std::vector<Index> controls;
  for (Index i = 0; i < n; ++i) {
    if (source.treatment[i] == 0.0) controls.push_back(i);
  }
  if (controls.empty()) throw ArgumentError("the data contain no non-treated units");
  Dataset data = source.covariates.SelectRows(controls);
  Eigen::VectorXd y0(static_cast<Index>(controls.size()));
  Eigen::VectorXd p(static_cast<Index>(controls.size()));
  for (std::size_t r = 0; r < controls.size(); ++r) {
    const Index i = controls[r];
    const double y = source.outcome[i];
    if (!(y >= 0.0 && y <= ites.y_max)) {
      throw ArgumentError("outcome " + std::to_string(y) + " in data row " +
                          std::to_string(i + 1) + " lies outside [0, y_max]");
    }
    y0[static_cast<Index>(r)] = y;
    p[static_cast<Index>(r)] =
        Logistic(intercept + source.covariates.x().row(i).dot(beta));
  }
  PopulationBuildInfo info;
  info.dropped_treated = n - static_cast<Index>(controls.size());
  std::vector<std::string> log;
  log.push_back("fitted logistic propensity on " + std::to_string(n) +
                " rows; dropped " + std::to_string(info.dropped_treated) +
                " treated rows");
  for (Index i = 0; i < p.size(); ++i) {
    p[i] = std::clamp(p[i], 1e-12, 1.0 - 1e-12);
  }
  return Finish(std::move(data), std::move(y0), std::move(p), ites, opts, seed,
                info, std::move(log));
}

Dataset ValidationData(const Population& pop) {
  return pop.data.SelectRows(pop.validation_ids);
}

Sample DrawReplication(const Population& pop, Index n_s, std::uint64_t seed) {
  const auto pool = static_cast<Index>(pop.pool_ids.size());
  if (n_s < 1 || n_s > pool) {
    throw ArgumentError("sample size " + std::to_string(n_s) +
                        " must be between 1 and the pool size " +
                        std::to_string(pool));
  }
  const auto ids =
      DrawWithoutReplacement(pop.pool_ids, n_s, DeriveSeed(seed, SeedTag::kSampleDraw, 0));
  Sample s;
  s.data = pop.data.SelectRows(ids);
  s.treatment.resize(n_s);
  s.outcome.resize(n_s);
  Eigen::VectorXd ite(n_s);
  const bool random = pop.ites.assignment == Assignment::kRandomHalf;
  for (Index r = 0; r < n_s; ++r) {
    const Index i = ids[r];
    Stream rng(DeriveSeed(seed, SeedTag::kAssignment, static_cast<std::uint64_t>(i)));
    const double d = rng.Bernoulli(random ? 0.5 : pop.p_full[i]) ? 1.0 : 0.0;
    s.treatment[r] = d;
    s.outcome[r] = pop.y0[i] + d * pop.ite[i];
    ite[r] = pop.ite[i];
  }
  s.true_ite = std::move(ite);
  return s;
}

TrueTargets ComputeTrueTargets(const Population& pop) {
  TrueTargets t;
  t.ite.resize(static_cast<Index>(pop.validation_ids.size()));
  for (std::size_t r = 0; r < pop.validation_ids.size(); ++r) {
    t.ite[static_cast<Index>(r)] = pop.ite[pop.validation_ids[r]];
  }
  const Aggregates agg = Aggregate(t.ite, pop.validation_groups);
  t.gate = agg.gate;
  t.ate = agg.ate;
  return t;
}

Eigen::VectorXd FitLogisticRegression(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& d,
                                      double* intercept) {
  const Index n = x.rows();
  const Index k = x.cols();
  if (d.size() != n) throw ArgumentError("x and d lengths differ");
  const double share = d.mean();
  if (share <= 0.0 || share >= 1.0) {
    throw EstimationError("logistic regression needs both classes");
  }
  // Work on standardized columns; constant columns get zero coefficients.
  Eigen::VectorXd center = x.colwise().mean();
  Eigen::VectorXd scale(k);
  Eigen::MatrixXd z(n, k + 1);
  z.col(0).setOnes();
  for (Index j = 0; j < k; ++j) {
    Eigen::VectorXd c = x.col(j).array() - center[j];
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n));
    scale[j] = sd > 0.0 ? sd : 0.0;
    z.col(j + 1) = sd > 0.0 ? Eigen::VectorXd(c / sd) : Eigen::VectorXd::Zero(n);
  }
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k + 1);
  theta[0] = std::log(share / (1.0 - share));
  constexpr double kRidge = 1e-8;
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd eta = z * theta;
    Eigen::VectorXd prob(n), w(n);
    for (Index i = 0; i < n; ++i) {
      prob[i] = Logistic(eta[i]);
      w[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
    }
    const Eigen::VectorXd grad = z.transpose() * (d - prob);
    Eigen::MatrixXd hess = z.transpose() * w.asDiagonal() * z;
    hess.diagonal().array() += kRidge * static_cast<double>(n);
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    theta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }
  Eigen::VectorXd beta(k);
  double shift = 0.0;
  for (Index j = 0; j < k; ++j) {
    beta[j] = scale[j] > 0.0 ? theta[j + 1] / scale[j] : 0.0;
    shift += beta[j] * center[j];
  }
  if (intercept) *intercept = theta[0] - shift;
  return beta;
}

}  // namespace cmlmc
