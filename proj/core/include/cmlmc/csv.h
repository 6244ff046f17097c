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
#ifndef CMLMC_CSV_H_
#define CMLMC_CSV_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cmlmc/data.h"

namespace cmlmc {

// Shortest decimal text that parses back to the identical double.
std::string FormatDouble(double value);
// Strict parse of a whole cell; throws ParseError naming the context.
double ParseDouble(std::string_view text, const std::string& context);

// Raw comma-separated table with a header row. No quoting support: cells
// may not contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based file line of each row, for error messages.
  std::vector<std::size_t> lines;

  // Column position; throws SchemaError if absent.
  std::size_t ColumnIndex(const std::string& name) const;
};

CsvTable ReadCsvTable(const std::filesystem::path& path);
CsvTable ParseCsvTable(std::istream& in, const std::string& source);
void WriteCsvTable(const std::filesystem::path& path, const CsvTable& table);

// Schema file: one "name,kind" pair per line; blank lines and lines
// starting with '#' are skipped.
std::vector<ColumnSpec> LoadSchema(const std::filesystem::path& path);
void WriteSchema(const std::filesystem::path& path,
                 const std::vector<ColumnSpec>& schema);

// Reads the schema's columns (by header name, any order, extra columns
// ignored) into a validated Dataset. Missing cells ("", "NA", "NaN") are
// rejected with the offending data row; malformed numbers report the line.
Dataset LoadCsv(const std::filesystem::path& path,
                const std::vector<ColumnSpec>& schema);
Dataset DatasetFromTable(const CsvTable& table,
                         const std::vector<ColumnSpec>& schema,
                         const std::string& source);
void WriteCsv(const std::filesystem::path& path, const Dataset& data);

}  // namespace cmlmc

#endif  // CMLMC_CSV_H_
