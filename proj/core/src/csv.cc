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
#include "cmlmc/csv.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cmlmc/errors.h"

namespace cmlmc {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> SplitLine(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.emplace_back(Trim(line.substr(start)));
      break;
    }
    cells.emplace_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool IsMissing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" ||
         cell == "null";
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double ParseDouble(std::string_view text, const std::string& context) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
      text.empty()) {
    throw ParseError(context + ": malformed number '" + std::string(text) +
                     "'");
  }
  return value;
}

std::size_t CsvTable::ColumnIndex(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  throw SchemaError("missing column '" + name + "'");
}

CsvTable ParseCsvTable(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto cells = SplitLine(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.lines.push_back(line_no);
  }
  if (!have_header) throw ParseError(source + ": empty file");
  return table;
}

CsvTable ReadCsvTable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  return ParseCsvTable(in, path.string());
}

void WriteCsvTable(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  auto write_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out << ',';
      out << cells[j];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

std::vector<ColumnSpec> LoadSchema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open schema '" + path.string() + "'");
  std::vector<ColumnSpec> schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto cells = SplitLine(trimmed);
    if (cells.size() != 2 || cells[0].empty()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'name,kind'");
    }
    try {
      schema.push_back({cells[0], ParseColumnKind(cells[1])});
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  if (schema.empty()) throw SchemaError(path.string() + ": empty schema");
  return schema;
}

void WriteSchema(const std::filesystem::path& path,
                 const std::vector<ColumnSpec>& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  for (const auto& c : schema) out << c.name << ',' << ColumnKindName(c.kind) << '\n';
}

Dataset DatasetFromTable(const CsvTable& table,
                         const std::vector<ColumnSpec>& schema,
                         const std::string& source) {
  std::vector<std::size_t> positions;
  for (const auto& col : schema) {
    try {
      positions.push_back(table.ColumnIndex(col.name));
    } catch (const SchemaError&) {
      throw SchemaError(source + ": header lacks schema column '" + col.name +
                        "'");
    }
  }
  const auto n = static_cast<Index>(table.rows.size());
  if (n == 0) throw SchemaError(source + ": no data rows");
  Eigen::MatrixXd x(n, static_cast<Index>(schema.size()));
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::string where =
        source + ":" + std::to_string(table.lines[i]) + " (data row " +
        std::to_string(i + 1) + ")";
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string& cell = row[positions[j]];
      if (IsMissing(cell)) {
        throw SchemaError(where + ": missing value in column '" +
                          schema[j].name + "'");
      }
      const double v = ParseDouble(cell, where + " column '" + schema[j].name + "'");
      if (schema[j].kind == ColumnKind::kBinary && v != 0.0 && v != 1.0) {
        throw SchemaError(where + ": binary column '" + schema[j].name +
                          "' holds '" + cell + "'");
      }
      x(i, static_cast<Index>(j)) = v;
    }
  }
  return Dataset(std::move(x), schema);
}

Dataset LoadCsv(const std::filesystem::path& path,
                const std::vector<ColumnSpec>& schema) {
  return DatasetFromTable(ReadCsvTable(path), schema, path.string());
}

void WriteCsv(const std::filesystem::path& path, const Dataset& data) {
  CsvTable table;
  for (const auto& c : data.columns()) table.header.push_back(c.name);
  table.rows.reserve(data.rows());
  for (Index i = 0; i < data.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(data.cols());
    for (Index j = 0; j < data.cols(); ++j) row.push_back(FormatDouble(data.x()(i, j)));
    table.rows.push_back(std::move(row));
  }
  WriteCsvTable(path, table);
}

}  // namespace cmlmc
