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

#ifndef CMLMC_MODEL_IO_H_
#define CMLMC_MODEL_IO_H_

#include <filesystem>
#include <string>

#include "cmlmc/causal_forest.h"
#include "cmlmc/forest.h"
#include "cmlmc/lasso.h"

namespace cmlmc {

// Self-describing JSON documents with a format tag, version, model kind,
// the fit parameters (including the seed) and everything prediction needs.
// Doubles round-trip exactly. Readers throw ParseError on malformed JSON and
// SchemaError on a wrong kind, unknown version or inconsistent contents.
inline constexpr int kModelFormatVersion = 1;

std::string ModelToJson(const ForestModel& model);
std::string ModelToJson(const CausalForestModel& model);
std::string ModelToJson(const LassoModel& model);

ForestModel ForestFromJson(const std::string& text);
CausalForestModel CausalForestFromJson(const std::string& text);
LassoModel LassoFromJson(const std::string& text);

void SaveModel(const ForestModel& model, const std::filesystem::path& path);
void SaveModel(const CausalForestModel& model, const std::filesystem::path& path);
void SaveModel(const LassoModel& model, const std::filesystem::path& path);

ForestModel LoadForestModel(const std::filesystem::path& path);
CausalForestModel LoadCausalForestModel(const std::filesystem::path& path);
LassoModel LoadLassoModel(const std::filesystem::path& path);

}  // namespace cmlmc

#endif  // CMLMC_MODEL_IO_H_
