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
#include <CLI11.hpp>

#include <ostream>

#include "cmlmc/errors.h"
#include "cmlmc/study.h"

namespace cmlmc {

namespace {

StudyConfig EffectiveConfig(const std::string& path, const std::string& output_dir,
                            int parallelism) {
  StudyConfig config = LoadConfig(path);
  ApplyEnvironmentOverrides(config);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (parallelism > 0) config.parallelism = parallelism;
  config.Validate();
  return config;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal machine learning estimators and Monte Carlo study engine",
               "cmlmc"};
  app.require_subcommand(1);

  std::string config_path, out_dir, study_dir, report_out;
  int parallelism = 0;

  auto* build = app.add_subcommand("build-pop", "Build a population and save it");
  build->add_option("-c,--config", config_path, "Study config file")->required();
  build->add_option("-o,--out", out_dir, "Population directory to write")->required();

  auto* run = app.add_subcommand("run", "Run a Monte Carlo study");
  run->add_option("-c,--config", config_path, "Study config file")->required();
  run->add_option("-o,--output-dir", out_dir, "Overrides study.output_dir");
  run->add_option("-j,--parallelism", parallelism, "Overrides study.parallelism")
      ->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Regenerate reports from a study directory");
  report->add_option("-d,--dir", study_dir, "Study directory")->required();
  report->add_option("-o,--out", report_out, "Where to write (default: the study directory)");

  auto* validate = app.add_subcommand("validate-config", "Check and echo a config");
  validate->add_option("-c,--config", config_path, "Study config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const StudyConfig config = EffectiveConfig(config_path, "", 0);
      out << EchoConfig(config);
      return 0;
    }
    if (*build) {
      const StudyConfig config = EffectiveConfig(config_path, "", 0);
      const Population pop = ObtainPopulation(config);
      SavePopulation(pop, out_dir);
      out << "population: " << pop.size() << " units, "
          << pop.validation_ids.size() << " validation, "
          << pop.group_names.size() << " groups -> " << out_dir << "\n";
      return 0;
    }
    if (*run) {
      const StudyConfig config = EffectiveConfig(config_path, out_dir, parallelism);
      if (config.output_dir.empty()) {
        throw ArgumentError("run needs study.output_dir, --output-dir or "
                            "CMLMC_OUTPUT_DIR");
      }
      const StudyResult result = RunStudy(config);
      int resumed = 0;
      for (const auto& rec : result.replications) resumed += rec.resumed ? 1 : 0;
      out << "study: " << result.replications.size() << " replications ("
          << resumed << " resumed), " << result.estimator_ids.size()
          << " estimators -> " << config.output_dir << "\n";
      out << ReportTable(BuildReport(result, Level::kIate), Level::kIate);
      return 0;
    }
    if (*report) {
      const StudyResult result = LoadStudyResult(study_dir);
      const std::string dest = report_out.empty() ? study_dir : report_out;
      WriteReports(result, dest);
      out << "reports written to " << dest << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cmlmc
