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
#include <fstream>
#include <string>

#include <json.hpp>

#include "cmlmc/csv.h"
#include "cmlmc/dgp.h"
#include "cmlmc/errors.h"

namespace cmlmc {

namespace {

constexpr int kPopulationFormat = 1;

std::string Cell(const CsvTable& t, std::size_t row, std::size_t col) {
  if (col >= t.rows[row].size()) {
    throw ParseError("line " + std::to_string(t.lines[row]) + ": missing cell");
  }
  return t.rows[row][col];
}

double Number(const CsvTable& t, std::size_t row, std::size_t col,
              const std::string& file) {
  return ParseDouble(Cell(t, row, col),
                     file + " line " + std::to_string(t.lines[row]));
}

}  // namespace

void SavePopulation(const Population& pop, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteSchema(dir / "schema.csv", pop.data.columns());
  WriteCsv(dir / "covariates.csv", pop.data);

  CsvTable outcomes;
  outcomes.header = {"id", "y0", "ite", "p"};
  for (Index i = 0; i < pop.size(); ++i) {
    outcomes.rows.push_back({std::to_string(i), FormatDouble(pop.y0[i]),
                             FormatDouble(pop.ite[i]),
                             FormatDouble(pop.p_full[i])});
  }
  WriteCsvTable(dir / "outcomes.csv", outcomes);

  std::vector<int> group(static_cast<std::size_t>(pop.size()), -1);
  std::vector<char> validation(static_cast<std::size_t>(pop.size()), 0);
  for (std::size_t r = 0; r < pop.validation_ids.size(); ++r) {
    validation[pop.validation_ids[r]] = 1;
    group[pop.validation_ids[r]] = pop.validation_groups[r];
  }
  CsvTable groups;
  groups.header = {"id", "validation", "group"};
  for (Index i = 0; i < pop.size(); ++i) {
    groups.rows.push_back({std::to_string(i), validation[i] ? "1" : "0",
                           std::to_string(group[i])});
  }
  WriteCsvTable(dir / "groups.csv", groups);

  CsvTable names;
  names.header = {"group", "name"};
  for (std::size_t g = 0; g < pop.group_names.size(); ++g) {
    names.rows.push_back({std::to_string(g), pop.group_names[g]});
  }
  WriteCsvTable(dir / "group_names.csv", names);

  nlohmann::ordered_json m;
  m["format"] = kPopulationFormat;
  m["rng"] = "splitmix64-counter";
  m["seed"] = pop.seed;
  m["n_population"] = pop.size();
  m["n_validation"] = pop.validation_ids.size();
  m["n_groups"] = pop.group_names.size();
  m["ites"] = {{"alpha", FormatDouble(pop.ites.alpha)},
               {"noise", NoiseKindName(pop.ites.noise)},
               {"assignment", AssignmentName(pop.ites.assignment)},
               {"y_max", pop.ites.y_max}};
  m["build"] = {{"intercept_shift", FormatDouble(pop.info.intercept_shift)},
                {"trim_rounds", pop.info.trim_rounds},
                {"trimmed", pop.info.trimmed},
                {"dropped_treated", pop.info.dropped_treated},
                {"boundary_share_zero", FormatDouble(pop.info.boundary_share_zero)},
                {"boundary_share_max", FormatDouble(pop.info.boundary_share_max)}};
  m["log"] = pop.log;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << "\n";
}

Population LoadPopulation(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ArgumentError("population directory '" + dir.string() +
                        "' does not exist");
  }
  Population pop;
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ArgumentError("missing " + (dir / "manifest.json").string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "manifest.json").string() + ": " + e.what());
  }
  try {
    if (m.at("format").get<int>() != kPopulationFormat) {
      throw SchemaError("unsupported population format");
    }
    pop.seed = m.at("seed").get<std::uint64_t>();
    const auto& ites = m.at("ites");
    pop.ites.alpha = ParseDouble(ites.at("alpha").get<std::string>(), "manifest alpha");
    pop.ites.noise = ParseNoiseKind(ites.at("noise").get<std::string>());
    pop.ites.assignment = ParseAssignment(ites.at("assignment").get<std::string>());
    pop.ites.y_max = ites.at("y_max").get<int>();
    const auto& b = m.at("build");
    pop.info.intercept_shift =
        ParseDouble(b.at("intercept_shift").get<std::string>(), "manifest");
    pop.info.trim_rounds = b.at("trim_rounds").get<int>();
    pop.info.trimmed = b.at("trimmed").get<Index>();
    pop.info.dropped_treated = b.at("dropped_treated").get<Index>();
    pop.info.boundary_share_zero =
        ParseDouble(b.at("boundary_share_zero").get<std::string>(), "manifest");
    pop.info.boundary_share_max =
        ParseDouble(b.at("boundary_share_max").get<std::string>(), "manifest");
    pop.log = m.at("log").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError((dir / "manifest.json").string() + ": " + e.what());
  }

  const auto schema = LoadSchema(dir / "schema.csv");
  pop.data = LoadCsv(dir / "covariates.csv", schema);
  const Index n = pop.data.rows();

  const CsvTable outcomes = ReadCsvTable(dir / "outcomes.csv");
  if (static_cast<Index>(outcomes.rows.size()) != n) {
    throw SchemaError("outcomes.csv has " + std::to_string(outcomes.rows.size()) +
                      " rows, covariates.csv " + std::to_string(n));
  }
  const auto cy0 = outcomes.ColumnIndex("y0");
  const auto cite = outcomes.ColumnIndex("ite");
  const auto cp = outcomes.ColumnIndex("p");
  pop.y0.resize(n);
  pop.ite.resize(n);
  pop.p_full.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    pop.y0[i] = Number(outcomes, r, cy0, "outcomes.csv");
    pop.ite[i] = Number(outcomes, r, cite, "outcomes.csv");
    pop.p_full[i] = Number(outcomes, r, cp, "outcomes.csv");
  }

  const CsvTable groups = ReadCsvTable(dir / "groups.csv");
  if (static_cast<Index>(groups.rows.size()) != n) {
    throw SchemaError("groups.csv row count does not match covariates.csv");
  }
  const auto cval = groups.ColumnIndex("validation");
  const auto cgroup = groups.ColumnIndex("group");
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    if (Number(groups, r, cval, "groups.csv") == 1.0) {
      pop.validation_ids.push_back(i);
      pop.validation_groups.push_back(
          static_cast<int>(Number(groups, r, cgroup, "groups.csv")));
    } else {
      pop.pool_ids.push_back(i);
    }
  }
  const CsvTable names = ReadCsvTable(dir / "group_names.csv");
  const auto cname = names.ColumnIndex("name");
  for (std::size_t r = 0; r < names.rows.size(); ++r) {
    pop.group_names.push_back(Cell(names, r, cname));
  }
  return pop;
}

}  // namespace cmlmc
