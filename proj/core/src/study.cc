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
#include "cmlmc/study.h"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cmlmc/causal.h"
#include "cmlmc/csv.h"
#include "cmlmc/errors.h"
#include "cmlmc/rng.h"

namespace cmlmc {

namespace fs = std::filesystem;

namespace {

constexpr int kStudyFormat = 1;
constexpr const char* kVersion = "0.1.0";

std::string RepStem(int r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rep_%06d", r);
  return buf;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileAtomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << bytes;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string Sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

std::string Value(const EstimatorOutcome& o, double v) {
  return o.ok ? FormatDouble(v) : "NA";
}

struct RepFiles {
  std::string values;
  std::string status;
  std::string timing;
};

RepFiles Serialize(const ReplicationRecord& rec,
                   const std::vector<std::string>& ids, Index n_units,
                   Index n_groups) {
  RepFiles f;
  std::string& v = f.values;
  v = "level,index";
  for (const auto& id : ids) v += "," + id;
  v += "\n";
  auto rows = [&](const char* level, Index count, auto pick) {
    for (Index i = 0; i < count; ++i) {
      v += std::string(level) + "," + std::to_string(i);
      for (const auto& o : rec.estimators) v += "," + Value(o, pick(o, i));
      v += "\n";
    }
  };
  rows("iate", n_units, [](const EstimatorOutcome& o, Index i) { return o.ok ? o.iate[i] : 0.0; });
  rows("gate", n_groups, [](const EstimatorOutcome& o, Index i) { return o.ok ? o.gate[i] : 0.0; });
  rows("ate", 1, [](const EstimatorOutcome& o, Index) { return o.ate; });
  f.status = "estimator,ok,error\n";
  f.timing = "estimator,seconds\n";
  for (std::size_t e = 0; e < ids.size(); ++e) {
    const auto& o = rec.estimators[e];
    f.status += ids[e] + "," + (o.ok ? "1" : "0") + "," + Sanitize(o.error) + "\n";
    f.timing += ids[e] + "," + FormatDouble(o.seconds) + "\n";
  }
  return f;
}

std::string ChecksumOf(const std::string& fingerprint, const RepFiles& f) {
  return Checksum(fingerprint + "\n" + f.values + f.status);
}

void Persist(const fs::path& dir, const ReplicationRecord& rec,
             const std::vector<std::string>& ids, Index n_units, Index n_groups,
             const std::string& fingerprint) {
  const RepFiles f = Serialize(rec, ids, n_units, n_groups);
  const std::string stem = RepStem(rec.replication);
  WriteFileAtomic(dir / (stem + ".csv"), f.values);
  WriteFileAtomic(dir / (stem + ".status.csv"), f.status);
  WriteFileAtomic(dir / (stem + ".timing.csv"), f.timing);
  WriteFileAtomic(dir / (stem + ".chk"), ChecksumOf(fingerprint, f) + "\n");
}

// Reads a persisted replication; nullopt when files are missing or do not
// match their checksum.
std::optional<ReplicationRecord> Restore(const fs::path& dir, int r,
                                         const std::vector<std::string>& ids,
                                         Index n_units, Index n_groups,
                                         const std::string& fingerprint) {
  const std::string stem = RepStem(r);
  const fs::path values = dir / (stem + ".csv");
  const fs::path status = dir / (stem + ".status.csv");
  const fs::path chk = dir / (stem + ".chk");
  if (!fs::exists(values) || !fs::exists(status) || !fs::exists(chk)) {
    return std::nullopt;
  }
  RepFiles f;
  f.values = ReadFile(values);
  f.status = ReadFile(status);
  std::string stored = ReadFile(chk);
  while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) {
    stored.pop_back();
  }
  if (stored != ChecksumOf(fingerprint, f)) return std::nullopt;

  ReplicationRecord rec;
  rec.replication = r;
  rec.resumed = true;
  rec.estimators.resize(ids.size());
  std::istringstream sin(f.status);
  const CsvTable st = ParseCsvTable(sin, status.string());
  if (st.rows.size() != ids.size()) return std::nullopt;
  for (std::size_t e = 0; e < ids.size(); ++e) {
    if (st.rows[e].at(0) != ids[e]) return std::nullopt;
    auto& o = rec.estimators[e];
    o.ok = st.rows[e].at(1) == "1";
    o.error = st.rows[e].size() > 2 ? st.rows[e][2] : "";
    if (o.ok) {
      o.iate.resize(n_units);
      o.gate.resize(n_groups);
    }
  }
  const fs::path timing = dir / (stem + ".timing.csv");
  if (fs::exists(timing)) {
    const CsvTable tt = ReadCsvTable(timing);
    for (std::size_t e = 0; e < ids.size() && e < tt.rows.size(); ++e) {
      rec.estimators[e].seconds = ParseDouble(tt.rows[e].at(1), timing.string());
    }
  }
  std::istringstream vin(f.values);
  const CsvTable vt = ParseCsvTable(vin, values.string());
  if (vt.header.size() != ids.size() + 2 ||
      static_cast<Index>(vt.rows.size()) != n_units + n_groups + 1) {
    return std::nullopt;
  }
  for (std::size_t row = 0; row < vt.rows.size(); ++row) {
    const auto& cells = vt.rows[row];
    if (cells.size() != ids.size() + 2) return std::nullopt;
    const Index i = static_cast<Index>(ParseDouble(cells[1], values.string()));
    for (std::size_t e = 0; e < ids.size(); ++e) {
      auto& o = rec.estimators[e];
      if (!o.ok) continue;
      const double v = ParseDouble(cells[e + 2], values.string());
      if (cells[0] == "iate") {
        o.iate[i] = v;
      } else if (cells[0] == "gate") {
        o.gate[i] = v;
      } else {
        o.ate = v;
      }
    }
  }
  return rec;
}

std::string TruthCsv(const TrueTargets& truth,
                     const std::vector<std::string>& names) {
  std::string out = "level,index,name,truth\n";
  for (Index i = 0; i < truth.ite.size(); ++i) {
    out += "iate," + std::to_string(i) + ",," + FormatDouble(truth.ite[i]) + "\n";
  }
  for (Index g = 0; g < truth.gate.size(); ++g) {
    out += "gate," + std::to_string(g) + "," + Sanitize(names[g]) + "," +
           FormatDouble(truth.gate[g]) + "\n";
  }
  out += "ate,0,," + FormatDouble(truth.ate) + "\n";
  return out;
}

std::string Timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Creates or checks the study directory. Returns silently when the
// directory is new or was written by the same config.
void PrepareDirectory(const fs::path& dir, const StudyConfig& config,
                      const std::string& fingerprint,
                      const std::vector<std::string>& ids,
                      const StudyResult& result, const Population& pop) {
  fs::create_directories(dir);
  const fs::path manifest = dir / "manifest.json";
  if (fs::exists(manifest)) {
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(ReadFile(manifest));
    } catch (const nlohmann::json::exception& e) {
      throw Error("cannot parse " + manifest.string() + ": " + e.what());
    }
    const std::string existing = m.value("fingerprint", "");
    if (existing != fingerprint) {
      throw Error("output directory '" + dir.string() +
                  "' holds a study with config fingerprint " + existing +
                  ", this config has " + fingerprint +
                  "; refusing to mix results (use a fresh directory)");
    }
    return;
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().rfind("rep_", 0) == 0) {
      throw Error("output directory '" + dir.string() +
                  "' has replication files but no manifest; refusing to resume");
    }
  }
  nlohmann::ordered_json m;
  m["format"] = kStudyFormat;
  m["version"] = kVersion;
  m["rng"] = "splitmix64-counter";
  m["fingerprint"] = fingerprint;
  m["created"] = Timestamp();
  m["master_seed"] = config.master_seed;
  m["replication_seed_rule"] = "DeriveSeed(master_seed, replication tag 7, r)";
  m["replications"] = config.replications;
  m["estimators"] = ids;
  m["population"] = {{"units", pop.size()},
                     {"validation_units", pop.validation_ids.size()},
                     {"pool_units", pop.pool_ids.size()},
                     {"groups", pop.group_names.size()},
                     {"seed", pop.seed},
                     {"log", pop.log}};
  m["config"] = EchoConfig(config);
  WriteFileAtomic(manifest, m.dump(2) + "\n");
  WriteFileAtomic(dir / "truth.csv", TruthCsv(result.truth, result.group_names));
}

ReplicationRecord RunReplication(const StudyConfig& config,
                                 const Population& pop,
                                 const Dataset& validation, int r,
                                 const StudyHooks& hooks) {
  const std::uint64_t seed =
      DeriveSeed(config.master_seed, SeedTag::kReplication, static_cast<std::uint64_t>(r));
  const Sample sample = DrawReplication(pop, config.n_s, seed);
  ReplicationContext ctx(sample, validation, seed, config.ForestLearner(),
                         config.LassoLearner());
  ReplicationRecord rec;
  rec.replication = r;
  for (const auto& spec : config.estimators) {
    EstimatorOutcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (hooks.before_estimate) hooks.before_estimate(spec, r);
      o.iate = EstimateIate(spec, ctx);
      if (!o.iate.allFinite()) {
        throw EstimationError("non-finite IATE predictions");
      }
      const Aggregates agg = Aggregate(o.iate, pop.validation_groups);
      o.gate = agg.gate;
      o.ate = agg.ate;
      o.ok = true;
    } catch (const std::exception& e) {
      o = EstimatorOutcome{};
      o.error = e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
    rec.estimators.push_back(std::move(o));
  }
  return rec;
}

}  // namespace

PredictionTensor StudyResult::Tensor(std::size_t estimator, Level level) const {
  PredictionTensor t;
  switch (level) {
    case Level::kIate: t.truth = truth.ite; break;
    case Level::kGate: t.truth = truth.gate; break;
    case Level::kAte: t.truth = Eigen::VectorXd::Constant(1, truth.ate); break;
  }
  std::vector<const EstimatorOutcome*> ok;
  for (const auto& rec : replications) {
    if (rec.estimators.at(estimator).ok) ok.push_back(&rec.estimators[estimator]);
  }
  t.values.resize(static_cast<Index>(ok.size()), t.truth.size());
  for (std::size_t r = 0; r < ok.size(); ++r) {
    const auto row = static_cast<Index>(r);
    switch (level) {
      case Level::kIate: t.values.row(row) = ok[r]->iate.transpose(); break;
      case Level::kGate: t.values.row(row) = ok[r]->gate.transpose(); break;
      case Level::kAte: t.values(row, 0) = ok[r]->ate; break;
    }
  }
  return t;
}

int StudyResult::Failures(std::size_t estimator) const {
  int failures = 0;
  for (const auto& rec : replications) {
    if (!rec.estimators.at(estimator).ok) ++failures;
  }
  return failures;
}

Population ObtainPopulation(const StudyConfig& config) {
  switch (config.source) {
    case PopulationSource::kSynthetic:
      return BuildPopulation(config.synthetic, config.ites, config.population,
                             config.population_seed);
    case PopulationSource::kDirectory:
      return LoadPopulation(config.population_path);
    case PopulationSource::kCsv: {
      if (!fs::exists(config.population_path)) {
        throw ArgumentError("population file '" + config.population_path +
                            "' does not exist");
      }
      if (!fs::exists(config.schema_path)) {
        throw ArgumentError("schema file '" + config.schema_path +
                            "' does not exist");
      }
      const auto schema = LoadSchema(config.schema_path);
      const CsvTable table = ReadCsvTable(config.population_path);
      CsvSource src;
      src.covariates = DatasetFromTable(table, schema, config.population_path);
      const std::vector<ColumnSpec> extra = {
          {config.outcome_column, ColumnKind::kContinuous},
          {config.treatment_column, ColumnKind::kBinary}};
      const Dataset yd = DatasetFromTable(table, extra, config.population_path);
      src.outcome = yd.x().col(0);
      src.treatment = yd.x().col(1);
      return BuildPopulation(src, config.ites, config.population,
                             config.population_seed);
    }
  }
  throw ArgumentError("unknown population source");
}

StudyResult RunStudy(const StudyConfig& config, const StudyHooks& hooks) {
  config.Validate();
  const Population pop = ObtainPopulation(config);
  return RunStudy(config, pop, hooks);
}

StudyResult RunStudy(const StudyConfig& config, const Population& pop,
                     const StudyHooks& hooks) {
  config.Validate();
  if (config.n_s > static_cast<Index>(pop.pool_ids.size())) {
    throw ArgumentError("study.n_s (" + std::to_string(config.n_s) +
                        ") exceeds the sampling pool (" +
                        std::to_string(pop.pool_ids.size()) + " units)");
  }
  StudyResult result;
  result.config = config;
  for (const auto& e : config.estimators) result.estimator_ids.push_back(e.Id());
  result.truth = ComputeTrueTargets(pop);
  result.group_names = pop.group_names;
  result.replications.resize(static_cast<std::size_t>(config.replications));
  const Dataset validation = ValidationData(pop);
  const Index n_units = result.truth.ite.size();
  const Index n_groups = result.truth.gate.size();

  const std::string fingerprint = ConfigFingerprint(config);
  const bool persist = !config.output_dir.empty();
  const fs::path dir = config.output_dir;
  if (persist) {
    PrepareDirectory(dir, config, fingerprint, result.estimator_ids, result, pop);
  }

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= config.replications) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) return;
      }
      try {
        std::optional<ReplicationRecord> rec;
        if (persist) {
          rec = Restore(dir, r, result.estimator_ids, n_units, n_groups, fingerprint);
        }
        if (!rec) {
          rec = RunReplication(config, pop, validation, r, hooks);
          if (persist) {
            Persist(dir, *rec, result.estimator_ids, n_units, n_groups, fingerprint);
          }
        }
        result.replications[static_cast<std::size_t>(r)] = std::move(*rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_workers = std::min(config.parallelism, config.replications);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < n_workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  if (persist) WriteReports(result, dir);
  return result;
}

StudyResult LoadStudyResult(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) {
    throw ArgumentError("no study manifest at '" + manifest.string() + "'");
  }
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(ReadFile(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse " + manifest.string() + ": " + e.what());
  }
  StudyResult result;
  std::string fingerprint;
  try {
    result.config = ParseConfig(m.at("config").get<std::string>(), manifest.string());
    fingerprint = m.at("fingerprint").get<std::string>();
    result.estimator_ids = m.at("estimators").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(manifest.string() + ": " + e.what());
  }
  result.config.output_dir = dir.string();

  const CsvTable truth = ReadCsvTable(dir / "truth.csv");
  std::vector<double> ite, gate;
  for (const auto& row : truth.rows) {
    const double v = ParseDouble(row.at(3), "truth.csv");
    if (row[0] == "iate") {
      ite.push_back(v);
    } else if (row[0] == "gate") {
      gate.push_back(v);
      result.group_names.push_back(row.at(2));
    } else {
      result.truth.ate = v;
    }
  }
  result.truth.ite = Eigen::Map<Eigen::VectorXd>(ite.data(), static_cast<Index>(ite.size()));
  result.truth.gate =
      Eigen::Map<Eigen::VectorXd>(gate.data(), static_cast<Index>(gate.size()));

  for (int r = 0; r < result.config.replications; ++r) {
    auto rec = Restore(dir, r, result.estimator_ids, result.truth.ite.size(),
                       result.truth.gate.size(), fingerprint);
    if (!rec) {
      throw Error("replication " + std::to_string(r) + " in '" + dir.string() +
                  "' is missing or fails its checksum; rerun the study");
    }
    rec->resumed = false;
    result.replications.push_back(std::move(*rec));
  }
  return result;
}

}  // namespace cmlmc
