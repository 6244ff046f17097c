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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cmlmc/csv.h"
#include "cmlmc/errors.h"
#include "cmlmc/study.h"

namespace cmlmc {

namespace {

std::string Opt(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "-";
}

std::string Num(double v) { return std::isfinite(v) ? FormatDouble(v) : "NA"; }

std::string Fixed(double v, int digits = 3) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Fixed(const std::optional<double>& v, int digits = 3) {
  return v ? Fixed(*v, digits) : "-";
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<PerformanceReport> BuildReport(const StudyResult& result, Level level) {
  std::vector<PerformanceReport> rows;
  const int total = static_cast<int>(result.replications.size());
  for (std::size_t e = 0; e < result.estimator_ids.size(); ++e) {
    const PredictionTensor tensor = result.Tensor(e, level);
    PerformanceReport row;
    if (tensor.replications() >= 2) {
      row = Summarize(tensor, level);
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.mean_mse = row.se_mean_mse = row.median_mse = nan;
      row.mean_abs_bias = row.mean_bias = row.mean_sd = nan;
      row.replications = static_cast<int>(tensor.replications());
    }
    row.estimator = result.estimator_ids[e];
    row.failures = result.Failures(e);
    row.unreliable = total > 0 && row.failures > kUnreliableFailureShare * total;
    rows.push_back(std::move(row));
  }
  FlagBest(rows);
  return rows;
}

std::string ReportCsv(const std::vector<PerformanceReport>& rows, Level level) {
  std::string out =
      "estimator,mean_mse,se_mean_mse,median_mse,mean_abs_bias,mean_bias,"
      "mean_sd,";
  out += level == Level::kAte ? "jb_p_value" : "jb_reject_share";
  out += ",skewness,kurtosis,corr,var_ratio,replications,failures,"
         "jb_degenerate,unreliable,best\n";
  for (const auto& r : rows) {
    out += r.estimator + "," + Num(r.mean_mse) + "," + Num(r.se_mean_mse) + "," +
           Num(r.median_mse) + "," + Num(r.mean_abs_bias) + "," +
           Num(r.mean_bias) + "," + Num(r.mean_sd) + "," + Opt(r.jb) + "," +
           Opt(r.mean_skew) + "," + Opt(r.mean_kurt) + "," + Opt(r.corr) + "," +
           Opt(r.var_ratio) + "," + std::to_string(r.replications) + "," +
           std::to_string(r.failures) + "," + std::to_string(r.jb_degenerate) +
           "," + (r.unreliable ? "1" : "0") + "," + (r.best ? "1" : "0") + "\n";
  }
  return out;
}

std::string ReportTable(const std::vector<PerformanceReport>& rows, Level level) {
  const std::vector<std::string> header = {
      "estimator", "MSE", "SE(MSE)", "Med.MSE", "|Bias|", "Bias", "SD",
      level == Level::kAte ? "JB p" : "JB",
      "Skew.", "Kurt.", "Corr.", "Var.ratio", "R", "fail"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& r : rows) {
    std::string name = r.estimator;
    if (r.best) name += " *";
    if (r.unreliable) name += " !";
    cells.push_back({name, Fixed(r.mean_mse), Fixed(r.se_mean_mse),
                     Fixed(r.median_mse), Fixed(r.mean_abs_bias),
                     Fixed(r.mean_bias), Fixed(r.mean_sd), Fixed(r.jb, 2),
                     Fixed(r.mean_skew, 2), Fixed(r.mean_kurt, 2),
                     Fixed(r.corr, 2), Fixed(r.var_ratio, 2),
                     std::to_string(r.replications), std::to_string(r.failures)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    out += "\n";
  }
  return out;
}

void WriteReports(const StudyResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string tables;
  const int total = static_cast<int>(result.replications.size());
  for (Level level : {Level::kIate, Level::kGate, Level::kAte}) {
    const auto rows = BuildReport(result, level);
    WriteText(dir / (std::string(LevelName(level)) + ".csv"), ReportCsv(rows, level));
    Index units = 1;
    if (level == Level::kIate) units = result.truth.ite.size();
    if (level == Level::kGate) units = result.truth.gate.size();
    tables += std::string(level == Level::kIate   ? "IATE"
                          : level == Level::kGate ? "GATE"
                                                  : "ATE") +
              " (" + std::to_string(units) + " targets, " + std::to_string(total) +
              " replications; * within two SE of the best, ! more than 10% "
              "failures)\n";
    tables += ReportTable(rows, level) + "\n";
  }
  WriteText(dir / "tables.txt", tables);
}

std::vector<bool> ReadBestFlags(const std::filesystem::path& csv) {
  const CsvTable table = ReadCsvTable(csv);
  const auto col = table.ColumnIndex("best");
  std::vector<bool> flags;
  for (const auto& row : table.rows) flags.push_back(row.at(col) == "1");
  return flags;
}

}  // namespace cmlmc
