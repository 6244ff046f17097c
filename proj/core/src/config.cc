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
#include "cmlmc/config.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "cmlmc/csv.h"
#include "cmlmc/errors.h"

namespace cmlmc {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T ParseInteger(const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ArgumentError("'" + text + "' is not a valid integer");
  }
  return value;
}

bool ParseBool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ArgumentError("'" + text + "' is not a boolean");
}

double Real(const std::string& text) { return ParseDouble(text, "value"); }

std::string Bool(bool b) { return b ? "true" : "false"; }

std::string SourceName(PopulationSource s) {
  switch (s) {
    case PopulationSource::kSynthetic: return "synthetic";
    case PopulationSource::kCsv: return "csv";
    case PopulationSource::kDirectory: return "directory";
  }
  return "?";
}

PopulationSource ParseSource(const std::string& text) {
  if (text == "synthetic") return PopulationSource::kSynthetic;
  if (text == "csv") return PopulationSource::kCsv;
  if (text == "directory") return PopulationSource::kDirectory;
  throw ArgumentError("unknown population source '" + text + "'");
}

// "age:30:40,german" <-> grouping variables.
std::vector<GroupingVar> ParseVars(const std::string& text) {
  std::vector<GroupingVar> vars;
  for (const auto& item : SplitList(text, ',')) {
    const auto parts = SplitList(item, ':');
    GroupingVar v;
    v.column = parts.at(0);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      v.cut_points.push_back(Real(parts[i]));
    }
    vars.push_back(std::move(v));
  }
  return vars;
}

std::string FormatVars(const std::vector<GroupingVar>& vars) {
  std::string out;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ",";
    out += vars[i].column;
    for (double c : vars[i].cut_points) out += ":" + FormatDouble(c);
  }
  return out;
}

std::string FormatReals(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += FormatDouble(values[i]);
  }
  return out;
}

std::string FormatEstimators(const std::vector<EstimatorSpec>& specs) {
  std::string out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) out += ",";
    out += specs[i].Id();
  }
  return out;
}

struct Entry {
  const char* key;
  std::function<std::string(const StudyConfig&)> get;
  std::function<void(StudyConfig&, const std::string&)> set;
};

const std::vector<Entry>& Entries() {
  static const std::vector<Entry> entries = {
      {"population.source", [](const StudyConfig& c) { return SourceName(c.source); },
       [](StudyConfig& c, const std::string& v) { c.source = ParseSource(v); }},
      {"population.path", [](const StudyConfig& c) { return c.population_path; },
       [](StudyConfig& c, const std::string& v) { c.population_path = v; }},
      {"population.schema", [](const StudyConfig& c) { return c.schema_path; },
       [](StudyConfig& c, const std::string& v) { c.schema_path = v; }},
      {"population.outcome_column", [](const StudyConfig& c) { return c.outcome_column; },
       [](StudyConfig& c, const std::string& v) { c.outcome_column = v; }},
      {"population.treatment_column",
       [](const StudyConfig& c) { return c.treatment_column; },
       [](StudyConfig& c, const std::string& v) { c.treatment_column = v; }},
      {"population.seed",
       [](const StudyConfig& c) { return std::to_string(c.population_seed); },
       [](StudyConfig& c, const std::string& v) {
         c.population_seed = ParseInteger<std::uint64_t>(v);
       }},
      {"population.n_validation",
       [](const StudyConfig& c) { return std::to_string(c.population.n_validation); },
       [](StudyConfig& c, const std::string& v) {
         c.population.n_validation = ParseInteger<Index>(v);
       }},
      {"population.trim_low",
       [](const StudyConfig& c) { return FormatDouble(c.population.trim_low); },
       [](StudyConfig& c, const std::string& v) { c.population.trim_low = Real(v); }},
      {"population.trim_high",
       [](const StudyConfig& c) { return FormatDouble(c.population.trim_high); },
       [](StudyConfig& c, const std::string& v) { c.population.trim_high = Real(v); }},
      {"population.target_share",
       [](const StudyConfig& c) { return FormatDouble(c.population.target_share); },
       [](StudyConfig& c, const std::string& v) {
         c.population.target_share = Real(v);
       }},
      {"groups.base",
       [](const StudyConfig& c) { return FormatVars(c.population.grouping.base); },
       [](StudyConfig& c, const std::string& v) {
         c.population.grouping.base = ParseVars(v);
       }},
      {"groups.refine_column",
       [](const StudyConfig& c) {
         return c.population.grouping.refine_column.value_or("");
       },
       [](StudyConfig& c, const std::string& v) {
         if (v.empty()) {
           c.population.grouping.refine_column.reset();
         } else {
           c.population.grouping.refine_column = v;
         }
       }},
      {"groups.refine_value",
       [](const StudyConfig& c) {
         return FormatDouble(c.population.grouping.refine_value);
       },
       [](StudyConfig& c, const std::string& v) {
         c.population.grouping.refine_value = Real(v);
       }},
      {"groups.refine_extra",
       [](const StudyConfig& c) {
         return FormatVars(c.population.grouping.refine_extra);
       },
       [](StudyConfig& c, const std::string& v) {
         c.population.grouping.refine_extra = ParseVars(v);
       }},
      {"groups.min_cell_size",
       [](const StudyConfig& c) {
         return std::to_string(c.population.grouping.min_cell_size);
       },
       [](StudyConfig& c, const std::string& v) {
         c.population.grouping.min_cell_size = ParseInteger<int>(v);
       }},
      {"synthetic.n_population",
       [](const StudyConfig& c) { return std::to_string(c.synthetic.n_population); },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.n_population = ParseInteger<Index>(v);
       }},
      {"synthetic.k_continuous",
       [](const StudyConfig& c) { return std::to_string(c.synthetic.k_continuous); },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.k_continuous = ParseInteger<int>(v);
       }},
      {"synthetic.k_binary",
       [](const StudyConfig& c) { return std::to_string(c.synthetic.k_binary); },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.k_binary = ParseInteger<int>(v);
       }},
      {"synthetic.propensity_coefficients",
       [](const StudyConfig& c) {
         return FormatReals(c.synthetic.propensity_coefficients);
       },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.propensity_coefficients.clear();
         for (const auto& item : SplitList(v, ',')) {
           c.synthetic.propensity_coefficients.push_back(Real(item));
         }
       }},
      {"synthetic.propensity_intercept",
       [](const StudyConfig& c) {
         return FormatDouble(c.synthetic.propensity_intercept);
       },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.propensity_intercept = Real(v);
       }},
      {"synthetic.share_zero",
       [](const StudyConfig& c) { return FormatDouble(c.synthetic.share_zero); },
       [](StudyConfig& c, const std::string& v) { c.synthetic.share_zero = Real(v); }},
      {"synthetic.share_max",
       [](const StudyConfig& c) { return FormatDouble(c.synthetic.share_max); },
       [](StudyConfig& c, const std::string& v) { c.synthetic.share_max = Real(v); }},
      {"synthetic.outcome_noise_sd",
       [](const StudyConfig& c) { return FormatDouble(c.synthetic.outcome_noise_sd); },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.outcome_noise_sd = Real(v);
       }},
      {"synthetic.seed",
       [](const StudyConfig& c) { return std::to_string(c.synthetic.seed); },
       [](StudyConfig& c, const std::string& v) {
         c.synthetic.seed = ParseInteger<std::uint64_t>(v);
       }},
      {"dgp.alpha", [](const StudyConfig& c) { return FormatDouble(c.ites.alpha); },
       [](StudyConfig& c, const std::string& v) { c.ites.alpha = Real(v); }},
      {"dgp.noise", [](const StudyConfig& c) { return NoiseKindName(c.ites.noise); },
       [](StudyConfig& c, const std::string& v) { c.ites.noise = ParseNoiseKind(v); }},
      {"dgp.assignment",
       [](const StudyConfig& c) { return AssignmentName(c.ites.assignment); },
       [](StudyConfig& c, const std::string& v) {
         c.ites.assignment = ParseAssignment(v);
       }},
      {"dgp.y_max", [](const StudyConfig& c) { return std::to_string(c.ites.y_max); },
       [](StudyConfig& c, const std::string& v) { c.ites.y_max = ParseInteger<int>(v); }},
      {"study.n_s", [](const StudyConfig& c) { return std::to_string(c.n_s); },
       [](StudyConfig& c, const std::string& v) { c.n_s = ParseInteger<Index>(v); }},
      {"study.replications",
       [](const StudyConfig& c) { return std::to_string(c.replications); },
       [](StudyConfig& c, const std::string& v) {
         c.replications = ParseInteger<int>(v);
       }},
      {"study.estimators",
       [](const StudyConfig& c) { return FormatEstimators(c.estimators); },
       [](StudyConfig& c, const std::string& v) {
         if (v == "all") {
           c.estimators = AllEstimators();
           return;
         }
         c.estimators.clear();
         for (const auto& id : SplitList(v, ',')) {
           c.estimators.push_back(EstimatorSpec::Parse(id));
         }
       }},
      {"study.master_seed",
       [](const StudyConfig& c) { return std::to_string(c.master_seed); },
       [](StudyConfig& c, const std::string& v) {
         c.master_seed = ParseInteger<std::uint64_t>(v);
       }},
      {"study.output_dir", [](const StudyConfig& c) { return c.output_dir; },
       [](StudyConfig& c, const std::string& v) { c.output_dir = v; }},
      {"study.parallelism",
       [](const StudyConfig& c) { return std::to_string(c.parallelism); },
       [](StudyConfig& c, const std::string& v) { c.parallelism = ParseInteger<int>(v); }},
      {"forest.n_trees", [](const StudyConfig& c) { return std::to_string(c.forest.n_trees); },
       [](StudyConfig& c, const std::string& v) { c.forest.n_trees = ParseInteger<int>(v); }},
      {"forest.mtry", [](const StudyConfig& c) { return std::to_string(c.forest.mtry); },
       [](StudyConfig& c, const std::string& v) { c.forest.mtry = ParseInteger<int>(v); }},
      {"forest.min_leaf",
       [](const StudyConfig& c) { return std::to_string(c.forest.min_leaf); },
       [](StudyConfig& c, const std::string& v) { c.forest.min_leaf = ParseInteger<int>(v); }},
      {"forest.build_fraction",
       [](const StudyConfig& c) { return FormatDouble(c.forest.build_fraction); },
       [](StudyConfig& c, const std::string& v) { c.forest.build_fraction = Real(v); }},
      {"forest.estimate_fraction",
       [](const StudyConfig& c) { return FormatDouble(c.forest.estimate_fraction); },
       [](StudyConfig& c, const std::string& v) { c.forest.estimate_fraction = Real(v); }},
      {"forest.threads",
       [](const StudyConfig& c) { return std::to_string(c.forest.n_threads); },
       [](StudyConfig& c, const std::string& v) {
         c.forest.n_threads = ParseInteger<int>(v);
       }},
      {"lasso.n_lambda", [](const StudyConfig& c) { return std::to_string(c.lasso.n_lambda); },
       [](StudyConfig& c, const std::string& v) { c.lasso.n_lambda = ParseInteger<int>(v); }},
      {"lasso.lambda_min_ratio",
       [](const StudyConfig& c) { return FormatDouble(c.lasso.lambda_min_ratio); },
       [](StudyConfig& c, const std::string& v) { c.lasso.lambda_min_ratio = Real(v); }},
      {"lasso.n_folds", [](const StudyConfig& c) { return std::to_string(c.lasso.n_folds); },
       [](StudyConfig& c, const std::string& v) { c.lasso.n_folds = ParseInteger<int>(v); }},
      {"lasso.max_iter", [](const StudyConfig& c) { return std::to_string(c.lasso.max_iter); },
       [](StudyConfig& c, const std::string& v) { c.lasso.max_iter = ParseInteger<int>(v); }},
      {"lasso.tol", [](const StudyConfig& c) { return FormatDouble(c.lasso.tol); },
       [](StudyConfig& c, const std::string& v) { c.lasso.tol = Real(v); }},
      {"lasso.standardize",
       [](const StudyConfig& c) { return Bool(c.lasso.standardize); },
       [](StudyConfig& c, const std::string& v) { c.lasso.standardize = ParseBool(v); }},
  };
  return entries;
}

// Keys that change where or how fast a study runs but not its results.
bool IsOperational(const std::string& key) {
  return key == "study.output_dir" || key == "study.parallelism" ||
         key == "forest.threads";
}

}  // namespace

void StudyConfig::Validate() const {
  if (replications < 2) throw ArgumentError("study.replications must be at least 2");
  if (n_s < 8) throw ArgumentError("study.n_s must be at least 8");
  if (parallelism < 1) throw ArgumentError("study.parallelism must be at least 1");
  if (estimators.empty()) throw ArgumentError("study.estimators is empty");
  std::set<std::string> seen;
  for (const auto& e : estimators) {
    e.Validate();
    if (!seen.insert(e.Id()).second) {
      throw ArgumentError("estimator " + e.Id() + " is listed twice");
    }
  }
  ites.Validate();
  forest.Validate();
  lasso.Validate();
  if (population.n_validation < 1) {
    throw ArgumentError("population.n_validation must be positive");
  }
  if (!(population.trim_low >= 0.0 && population.trim_low < population.trim_high &&
        population.trim_high <= 1.0)) {
    throw ArgumentError("population trim bounds must satisfy 0 <= low < high <= 1");
  }
  if (!(population.target_share > 0.0 && population.target_share < 1.0)) {
    throw ArgumentError("population.target_share must be in (0, 1)");
  }
  if (population.grouping.min_cell_size < 1) {
    throw ArgumentError("groups.min_cell_size must be positive");
  }
  switch (source) {
    case PopulationSource::kSynthetic:
      synthetic.Validate();
      if (n_s + population.n_validation > synthetic.n_population) {
        throw ArgumentError("study.n_s + population.n_validation (" +
                            std::to_string(n_s + population.n_validation) +
                            ") exceeds synthetic.n_population (" +
                            std::to_string(synthetic.n_population) + ")");
      }
      break;
    case PopulationSource::kCsv:
      if (population_path.empty() || schema_path.empty()) {
        throw ArgumentError("csv populations need population.path and "
                            "population.schema");
      }
      break;
    case PopulationSource::kDirectory:
      if (population_path.empty()) {
        throw ArgumentError("directory populations need population.path");
      }
      break;
  }
}

LearnerConfig StudyConfig::ForestLearner() const {
  LearnerConfig c;
  c.learner = Learner::kForest;
  c.forest = forest;
  c.lasso = lasso;
  return c;
}

LearnerConfig StudyConfig::LassoLearner() const {
  LearnerConfig c = ForestLearner();
  c.learner = Learner::kLasso;
  return c;
}

StudyConfig ParseConfig(const std::string& text, const std::string& source) {
  StudyConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(number);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(where + ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto& entries = Entries();
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const Entry& e) { return key == e.key; });
    if (it == entries.end()) throw ParseError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) {
      throw ParseError(where + ": key '" + key + "' given twice");
    }
    try {
      it->set(config, value);
    } catch (const Error& e) {
      throw ParseError(where + ": " + key + ": " + e.what());
    } catch (const std::exception& e) {
      throw ParseError(where + ": " + key + ": invalid value '" + value + "'");
    }
  }
  return config;
}

StudyConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str(), path.string());
}

void ApplyEnvironmentOverrides(StudyConfig& config) {
  if (const char* dir = std::getenv("CMLMC_OUTPUT_DIR"); dir && *dir) {
    config.output_dir = dir;
  }
  if (const char* par = std::getenv("CMLMC_PARALLELISM"); par && *par) {
    try {
      config.parallelism = ParseInteger<int>(par);
    } catch (const Error&) {
      throw ArgumentError(std::string("CMLMC_PARALLELISM='") + par +
                          "' is not an integer");
    }
  }
}

std::string EchoConfig(const StudyConfig& config) {
  std::string out;
  for (const auto& e : Entries()) {
    out += std::string(e.key) + " = " + e.get(config) + "\n";
  }
  return out;
}

std::string ConfigFingerprint(const StudyConfig& config) {
  std::string text;
  for (const auto& e : Entries()) {
    if (IsOperational(e.key)) continue;
    text += std::string(e.key) + " = " + e.get(config) + "\n";
  }
  return Checksum(text);
}

std::string Checksum(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cmlmc
