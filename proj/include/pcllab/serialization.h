// Copyright 2026 The pcllab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON forms of configs, run diagnostics and model checkpoints.
//
// Every *FromJson accepts partial objects: missing keys keep the value of
// `base`. Unknown keys are rejected with ConfigError so typos surface.

#ifndef PCLLAB_SERIALIZATION_H_
#define PCLLAB_SERIALIZATION_H_

#include <filesystem>
#include <string>

#include "json.hpp"
#include "pcllab/model.h"
#include "pcllab/training.h"

namespace pcllab {

using Json = nlohmann::json;

inline constexpr int kCheckpointSchemaVersion = 1;

Json ToJson(const LossConfig& cfg);
Json ToJson(const ModelConfig& cfg);
Json ToJson(const ShiftSpec& shift);
Json ToJson(const DatasetSpec& spec);
Json ToJson(const TrainConfig& cfg);
Json ToJson(const FinalDiagnostics& diag);

LossConfig LossConfigFromJson(const Json& j, const LossConfig& base = {});
ModelConfig ModelConfigFromJson(const Json& j, const ModelConfig& base = {});
ShiftSpec ShiftSpecFromJson(const Json& j, const ShiftSpec& base = {});
DatasetSpec DatasetSpecFromJson(const Json& j, const DatasetSpec& base = {});
TrainConfig TrainConfigFromJson(const Json& j, const TrainConfig& base = {});

struct Checkpoint {
  Model model;
  std::string rng_state;
  // Free-form provenance, typically the run's config echo.
  Json config;
};

// Layout:
//   {"format": "pcllab-checkpoint", "schema_version": 1,
//    "model_config": {...},
//    "parameters": [{"name": ..., "shape": [...], "data": [...]}, ...],
//    "rng_state": "...", "config": {...}}
// Parameter arrays are row-major and written with round-trip precision.
Json CheckpointToJson(const Checkpoint& checkpoint);
// Throws LoadError on malformed input, version or shape mismatch.
Checkpoint CheckpointFromJson(const Json& j);

// Throws IoError if the file cannot be written.
void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
// Throws IoError if unreadable, LoadError if unparseable or inconsistent.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Whole-file helpers. ReadJsonFile throws IoError / LoadError(kParse).
Json ReadJsonFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace pcllab

#endif  // PCLLAB_SERIALIZATION_H_
