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
#include <map>
#include <string>

#include "cmlmc/csv.h"
#include "cmlmc/dgp.h"
#include "cmlmc/errors.h"

namespace cmlmc {

GroupingScheme GroupingScheme::Default() {
  GroupingScheme s;
  s.base = {{"employability", {}}, {"female", {}}, {"foreigner", {}},
            {"qualified", {}}};
  s.refine_column = "employability";
  s.refine_value = 2.0;
  s.refine_extra = {{"age", {30.0, 40.0}}, {"german", {}}};
  return s;
}

namespace {

// Resolved grouping variable: column position and code function.
struct Coder {
  Index column = 0;
  std::string name;
  std::vector<double> cuts;
  bool binned = false;

  double Code(double value) const {
    if (!binned) return value;
    return static_cast<double>(
        std::upper_bound(cuts.begin(), cuts.end(), value) - cuts.begin());
  }

  std::string Describe(double code) const {
    if (!binned) return name + "=" + FormatDouble(code);
    const auto b = static_cast<std::size_t>(code);
    if (b == 0) return name + "<" + FormatDouble(cuts.front());
    if (b == cuts.size()) return name + ">=" + FormatDouble(cuts.back());
    return FormatDouble(cuts[b - 1]) + "<=" + name + "<" + FormatDouble(cuts[b]);
  }
};

Coder Resolve(const Dataset& data, const GroupingVar& var) {
  const auto pos = data.FindColumn(var.column);
  if (!pos) {
    throw ArgumentError("grouping column '" + var.column + "' does not exist");
  }
  Coder c;
  c.column = *pos;
  c.name = var.column;
  if (!var.cut_points.empty()) {
    if (!std::is_sorted(var.cut_points.begin(), var.cut_points.end()) ||
        std::adjacent_find(var.cut_points.begin(), var.cut_points.end()) !=
            var.cut_points.end()) {
      throw ArgumentError("cut points of '" + var.column +
                          "' must be strictly increasing");
    }
    c.cuts = var.cut_points;
    c.binned = true;
  } else if (data.column(*pos).kind == ColumnKind::kContinuous) {
    throw ArgumentError("continuous grouping column '" + var.column +
                        "' needs cut points");
  }
  return c;
}

constexpr double kParent = -1e300;  // placeholder code of unrefined cells

}  // namespace

GroupAssignment AssignGroups(const Dataset& data, const GroupingScheme& scheme) {
  if (scheme.base.empty() && !scheme.refine_column) {
    throw ArgumentError("grouping scheme has no variables");
  }
  std::vector<Coder> base, extra;
  for (const auto& v : scheme.base) base.push_back(Resolve(data, v));
  std::optional<Index> refine;
  if (scheme.refine_column) {
    refine = data.FindColumn(*scheme.refine_column);
    if (!refine) {
      throw ArgumentError("refinement column '" + *scheme.refine_column +
                          "' does not exist");
    }
    for (const auto& v : scheme.refine_extra) extra.push_back(Resolve(data, v));
  }
  const Index n = data.rows();
  const auto& x = data.x();
  std::vector<std::vector<double>> keys(static_cast<std::size_t>(n));
  std::map<std::vector<double>, Index> refined_size;
  for (Index i = 0; i < n; ++i) {
    auto& key = keys[i];
    for (const auto& c : base) key.push_back(c.Code(x(i, c.column)));
    const bool refined = refine && x(i, *refine) == scheme.refine_value;
    for (const auto& c : extra) {
      key.push_back(refined ? c.Code(x(i, c.column)) : kParent);
    }
    if (refined) ++refined_size[key];
  }

  GroupAssignment out;
  for (const auto& [key, size] : refined_size) {
    if (size >= scheme.min_cell_size) continue;
    std::string name;
    for (std::size_t v = 0; v < base.size(); ++v) {
      name += (v ? "|" : "") + base[v].Describe(key[v]);
    }
    for (std::size_t v = 0; v < extra.size(); ++v) {
      name += "|" + extra[v].Describe(key[base.size() + v]);
    }
    out.merge_log.push_back("refined cell " + name + " has " +
                            std::to_string(size) + " units (< " +
                            std::to_string(scheme.min_cell_size) +
                            "); merged into its parent cell");
  }
  for (Index i = 0; i < n; ++i) {
    auto it = refined_size.find(keys[i]);
    if (it != refined_size.end() && it->second < scheme.min_cell_size) {
      std::fill(keys[i].begin() + static_cast<std::ptrdiff_t>(base.size()),
                keys[i].end(), kParent);
    }
  }

  std::map<std::vector<double>, int> labels;
  for (const auto& key : keys) labels.emplace(key, 0);
  int next = 0;
  for (auto& [key, label] : labels) {
    label = next++;
    std::string name;
    for (std::size_t v = 0; v < base.size(); ++v) {
      name += (v ? "|" : "") + base[v].Describe(key[v]);
    }
    for (std::size_t v = 0; v < extra.size(); ++v) {
      if (key[base.size() + v] == kParent) continue;
      name += (name.empty() ? "" : "|") + extra[v].Describe(key[base.size() + v]);
    }
    out.names.push_back(name.empty() ? "all" : name);
  }
  out.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out.labels[i] = labels.at(keys[i]);
  return out;
}

}  // namespace cmlmc
