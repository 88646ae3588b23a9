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

#include "pcllab/serialization.h"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "pcllab/errors.h"

namespace pcllab {

namespace {

constexpr const char* kCheckpointFormat = "pcllab-checkpoint";

void CheckKeys(const Json& j, std::initializer_list<const char*> allowed,
               const char* what) {
  if (!j.is_object()) {
    throw ConfigError(std::string(what) + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
      return item.key() == k;
    });
    if (!known) {
      throw ConfigError(std::string(what) + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void Read(const Json& j, const char* key, T& out, const char* what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string(what) + "." + key + ": " + e.what());
  }
}

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

std::vector<NamedParameter> NamedParameters(const Model& model) {
  std::vector<NamedParameter> out;
  for (std::size_t i = 0; i < model.encoder.layers.size(); ++i) {
    const auto& layer = model.encoder.layers[i];
    const std::string prefix = "encoder.layers." + std::to_string(i);
    out.push_back({prefix + ".weight", layer.weight});
    if (layer.bias) out.push_back({prefix + ".bias", *layer.bias});
  }
  out.push_back({"classifier.weight", model.classifier.weight});
  return out;
}

}  // namespace

Json ToJson(const LossConfig& cfg) {
  return {{"kind", std::string(LossKindName(cfg.kind))},
          {"scale", cfg.scale},
          {"bce_threshold", cfg.bce_threshold},
          {"sfcl_threshold", cfg.sfcl_threshold},
          {"symmetrize", cfg.symmetrize}};
}

Json ToJson(const ModelConfig& cfg) {
  return {{"input_dim", cfg.input_dim},
          {"hidden", cfg.hidden},
          {"feature_dim", cfg.feature_dim},
          {"classes", cfg.classes}};
}

Json ToJson(const ShiftSpec& shift) {
  return {{"rotation", shift.rotation},
          {"translation", {shift.translation[0], shift.translation[1]}},
          {"scale", shift.scale},
          {"noise_sigma", shift.noise_sigma}};
}

Json ToJson(const DatasetSpec& spec) {
  return {{"classes", spec.classes},
          {"n_per_class", spec.n_per_class},
          {"shots", spec.shots},
          {"radius", spec.radius},
          {"shift", ToJson(spec.shift)}};
}

Json ToJson(const TrainConfig& cfg) {
  return {{"loss", ToJson(cfg.loss)},
          {"model", ToJson(cfg.model)},
          {"lr", cfg.lr},
          {"momentum", cfg.momentum},
          {"weight_decay", cfg.weight_decay},
          {"steps", cfg.steps},
          {"batch_source", cfg.batch_source},
          {"batch_target", cfg.batch_target},
          {"lambda_contrastive", cfg.lambda_contrastive},
          {"pseudo_label",
           {{"enabled", cfg.pseudo_label.enabled},
            {"confidence", cfg.pseudo_label.confidence},
            {"lambda_reg", cfg.pseudo_label.lambda_reg}}},
          {"augment_strength", cfg.augment_strength},
          {"eval_interval", cfg.eval_interval},
          {"few_shot_in_contrastive", cfg.few_shot_in_contrastive},
          {"probe",
           {{"steps", cfg.probe.steps},
            {"lr", cfg.probe.lr},
            {"momentum", cfg.probe.momentum}}},
          {"seed", cfg.seed}};
}

Json ToJson(const FinalDiagnostics& diag) {
  return {{"target_accuracy", diag.eval.target_accuracy},
          {"mean_max_prob", diag.eval.mean_max_prob},
          {"deviation", diag.eval.deviation},
          {"oracle_accuracy", diag.oracle_accuracy},
          {"oracle_gap", diag.oracle_gap}};
}

LossConfig LossConfigFromJson(const Json& j, const LossConfig& base) {
  CheckKeys(j, {"kind", "scale", "bce_threshold", "sfcl_threshold", "symmetrize"},
            "loss");
  LossConfig cfg = base;
  if (j.contains("kind")) {
    std::string kind;
    Read(j, "kind", kind, "loss");
    cfg.kind = ParseLossKind(kind);
  }
  Read(j, "scale", cfg.scale, "loss");
  Read(j, "bce_threshold", cfg.bce_threshold, "loss");
  Read(j, "sfcl_threshold", cfg.sfcl_threshold, "loss");
  Read(j, "symmetrize", cfg.symmetrize, "loss");
  cfg.Validate();
  return cfg;
}

ModelConfig ModelConfigFromJson(const Json& j, const ModelConfig& base) {
  CheckKeys(j, {"input_dim", "hidden", "feature_dim", "classes"}, "model");
  ModelConfig cfg = base;
  Read(j, "input_dim", cfg.input_dim, "model");
  Read(j, "hidden", cfg.hidden, "model");
  Read(j, "feature_dim", cfg.feature_dim, "model");
  Read(j, "classes", cfg.classes, "model");
  return cfg;
}

ShiftSpec ShiftSpecFromJson(const Json& j, const ShiftSpec& base) {
  CheckKeys(j, {"rotation", "translation", "scale", "noise_sigma"}, "shift");
  ShiftSpec shift = base;
  Read(j, "rotation", shift.rotation, "shift");
  if (j.contains("translation")) {
    std::vector<double> t;
    Read(j, "translation", t, "shift");
    if (t.size() != 2) throw ConfigError("shift.translation: need 2 values");
    shift.translation = {t[0], t[1]};
  }
  Read(j, "scale", shift.scale, "shift");
  Read(j, "noise_sigma", shift.noise_sigma, "shift");
  shift.Validate();
  return shift;
}

DatasetSpec DatasetSpecFromJson(const Json& j, const DatasetSpec& base) {
  CheckKeys(j, {"classes", "n_per_class", "shots", "radius", "shift"}, "dataset");
  DatasetSpec spec = base;
  Read(j, "classes", spec.classes, "dataset");
  Read(j, "n_per_class", spec.n_per_class, "dataset");
  Read(j, "shots", spec.shots, "dataset");
  Read(j, "radius", spec.radius, "dataset");
  if (j.contains("shift")) spec.shift = ShiftSpecFromJson(j["shift"], spec.shift);
  spec.Validate();
  return spec;
}

TrainConfig TrainConfigFromJson(const Json& j, const TrainConfig& base) {
  CheckKeys(j,
            {"loss", "model", "lr", "momentum", "weight_decay", "steps",
             "batch_source", "batch_target", "lambda_contrastive",
             "pseudo_label", "augment_strength", "eval_interval",
             "few_shot_in_contrastive", "probe", "seed"},
            "train");
  TrainConfig cfg = base;
  if (j.contains("loss")) cfg.loss = LossConfigFromJson(j["loss"], cfg.loss);
  if (j.contains("model")) cfg.model = ModelConfigFromJson(j["model"], cfg.model);
  Read(j, "lr", cfg.lr, "train");
  Read(j, "momentum", cfg.momentum, "train");
  Read(j, "weight_decay", cfg.weight_decay, "train");
  Read(j, "steps", cfg.steps, "train");
  Read(j, "batch_source", cfg.batch_source, "train");
  Read(j, "batch_target", cfg.batch_target, "train");
  Read(j, "lambda_contrastive", cfg.lambda_contrastive, "train");
  if (j.contains("pseudo_label")) {
    const Json& p = j["pseudo_label"];
    CheckKeys(p, {"enabled", "confidence", "lambda_reg"}, "pseudo_label");
    Read(p, "enabled", cfg.pseudo_label.enabled, "pseudo_label");
    Read(p, "confidence", cfg.pseudo_label.confidence, "pseudo_label");
    Read(p, "lambda_reg", cfg.pseudo_label.lambda_reg, "pseudo_label");
  }
  Read(j, "augment_strength", cfg.augment_strength, "train");
  Read(j, "eval_interval", cfg.eval_interval, "train");
  Read(j, "few_shot_in_contrastive", cfg.few_shot_in_contrastive, "train");
  if (j.contains("probe")) {
    const Json& p = j["probe"];
    CheckKeys(p, {"steps", "lr", "momentum"}, "probe");
    Read(p, "steps", cfg.probe.steps, "probe");
    Read(p, "lr", cfg.probe.lr, "probe");
    Read(p, "momentum", cfg.probe.momentum, "probe");
  }
  Read(j, "seed", cfg.seed, "train");
  cfg.Validate();
  return cfg;
}

Json CheckpointToJson(const Checkpoint& checkpoint) {
  Json params = Json::array();
  for (const auto& p : NamedParameters(checkpoint.model)) {
    params.push_back({{"name", p.name},
                      {"shape", p.tensor.shape()},
                      {"data", std::vector<double>(p.tensor.data().begin(),
                                                   p.tensor.data().end())}});
  }
  return {{"format", kCheckpointFormat},
          {"schema_version", kCheckpointSchemaVersion},
          {"model_config", ToJson(checkpoint.model.config)},
          {"parameters", std::move(params)},
          {"rng_state", checkpoint.rng_state},
          {"config", checkpoint.config}};
}

Checkpoint CheckpointFromJson(const Json& j) {
  using Reason = LoadError::Reason;
  if (!j.is_object()) throw LoadError(Reason::kParse, "checkpoint: not an object");
  for (const char* key : {"format", "schema_version", "model_config", "parameters"}) {
    if (!j.contains(key)) {
      throw LoadError(Reason::kMissingField,
                      std::string("checkpoint: missing '") + key + "'");
    }
  }
  if (j["format"] != kCheckpointFormat) {
    throw LoadError(Reason::kParse, "checkpoint: unexpected format tag");
  }
  if (!j["schema_version"].is_number_integer() ||
      j["schema_version"].get<int>() != kCheckpointSchemaVersion) {
    throw LoadError(Reason::kSchemaVersion,
                    "checkpoint: schema version " + j["schema_version"].dump() +
                        ", expected " + std::to_string(kCheckpointSchemaVersion));
  }

  Checkpoint out;
  try {
    const ModelConfig config = ModelConfigFromJson(j["model_config"]);
    config.Validate();
    Rng unused(0);
    out.model = Model::Init(config, unused);
  } catch (const Error& e) {
    throw LoadError(Reason::kParse, std::string("checkpoint: model_config: ") + e.what());
  }

  auto expected = NamedParameters(out.model);
  const Json& params = j["parameters"];
  if (!params.is_array() || params.size() != expected.size()) {
    throw LoadError(Reason::kShapeMismatch,
                    "checkpoint: expected " + std::to_string(expected.size()) +
                        " parameter tensors");
  }
  try {
    for (std::size_t k = 0; k < expected.size(); ++k) {
      const Json& p = params[k];
      if (p.at("name").get<std::string>() != expected[k].name) {
        throw LoadError(Reason::kShapeMismatch,
                        "checkpoint: parameter " + std::to_string(k) + " is '" +
                            p.at("name").get<std::string>() + "', expected '" +
                            expected[k].name + "'");
      }
      const auto shape = p.at("shape").get<Shape>();
      const auto data = p.at("data").get<std::vector<double>>();
      if (shape != expected[k].tensor.shape() || data.size() != NumElements(shape)) {
        throw LoadError(Reason::kShapeMismatch,
                        "checkpoint: '" + expected[k].name + "' has shape " +
                            ShapeToString(shape) + ", expected " +
                            ShapeToString(expected[k].tensor.shape()));
      }
      std::copy(data.begin(), data.end(), expected[k].tensor.mutable_data().begin());
    }
  } catch (const Json::exception& e) {
    throw LoadError(Reason::kParse, std::string("checkpoint: ") + e.what());
  }
  if (j.contains("rng_state") && j["rng_state"].is_string()) {
    out.rng_state = j["rng_state"].get<std::string>();
  }
  if (j.contains("config")) out.config = j["config"];
  return out;
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw LoadError(LoadError::Reason::kParse,
                    path.string() + ": " + e.what());
  }
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path) {
  WriteTextFile(path, CheckpointToJson(checkpoint).dump(1) + "\n");
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromJson(ReadJsonFile(path));
}

}  // namespace pcllab
