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

#include "pcllab/model.h"

#include <algorithm>

#include "pcllab/autodiff.h"
#include "pcllab/errors.h"
#include "pcllab/supervised.h"

namespace pcllab {

void ModelConfig::Validate() const {
  if (input_dim == 0 || hidden == 0 || feature_dim == 0) {
    throw ConfigError("ModelConfig: widths must be positive");
  }
  if (classes < 2) throw ConfigError("ModelConfig: need at least 2 classes");
}

Model Model::Init(const ModelConfig& config, Rng& rng) {
  config.Validate();
  Model model;
  model.config = config;
  model.encoder = Mlp::Init(
      {config.input_dim, config.hidden, config.hidden, config.feature_dim},
      Activation::kTanh, rng);
  model.classifier =
      Linear::Init(config.feature_dim, config.classes, /*with_bias=*/false, rng);
  return model;
}

Model Model::Identity(std::size_t dim) {
  Model model;
  model.config = {dim, dim, dim, dim};
  Tensor w = Tensor::Identity(dim);
  w.set_requires_grad(true);
  model.classifier.weight = w;
  return model;
}

Tensor Model::EncodeFeatures(const Tensor& batch) const {
  if (batch.rank() != 2 || batch.cols() != config.input_dim) {
    throw DimensionError("Model: expected input width " +
                         std::to_string(config.input_dim) + ", got shape " +
                         ShapeToString(batch.shape()));
  }
  return encoder.Forward(batch);
}

ModelOutputs Model::Forward(const Tensor& batch) const {
  ModelOutputs out;
  out.features = EncodeFeatures(batch);
  out.logits = classifier.Forward(out.features);
  out.probs = SoftmaxRows(out.logits);
  return out;
}

std::vector<Tensor> Model::Parameters() const {
  std::vector<Tensor> params = encoder.Parameters();
  classifier.CollectParameters(params);
  return params;
}

ProjectionHead ProjectionHead::Init(std::size_t dim, Rng& rng) {
  return {Mlp::Init({dim, dim, dim}, Activation::kRelu, rng)};
}

std::vector<std::size_t> ArgmaxRows(const Tensor& scores) {
  const std::size_t n = scores.rows(), c = scores.cols();
  std::vector<std::size_t> out(n);
  auto d = scores.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = d.data() + i * c;
    out[i] = static_cast<std::size_t>(std::max_element(row, row + c) - row);
  }
  return out;
}

double Accuracy(const Tensor& scores, std::span<const std::size_t> labels) {
  if (labels.size() != scores.rows()) {
    throw DimensionError("Accuracy: one label per row required");
  }
  if (labels.empty()) throw ContractError("Accuracy: empty batch");
  const auto predicted = ArgmaxRows(scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double MeanMaxProbability(const Tensor& probs) {
  const std::size_t n = probs.rows(), c = probs.cols();
  if (n == 0) return 0.0;
  double total = 0.0;
  auto d = probs.data();
  for (std::size_t i = 0; i < n; ++i) {
    total += *std::max_element(d.begin() + static_cast<std::ptrdiff_t>(i * c),
                               d.begin() + static_cast<std::ptrdiff_t>((i + 1) * c));
  }
  return total / static_cast<double>(n);
}

double FreezeEncoderRetrainClassifier(const Model& model, const Tensor& points,
                                      std::span<const std::size_t> labels,
                                      const ProbeOptions& options) {
  if (points.rank() != 2 || points.rows() == 0) {
    throw ContractError("FreezeEncoderRetrainClassifier: empty dataset");
  }
  if (labels.size() != points.rows()) {
    throw DimensionError("FreezeEncoderRetrainClassifier: label count");
  }
  // Detached, so no gradient can reach the encoder.
  const Tensor features = model.EncodeFeatures(points).detach();
  Rng rng(options.seed);
  Linear probe = Linear::Init(features.cols(), model.config.classes,
                              /*with_bias=*/false, rng);
  Sgd sgd({probe.weight}, options.lr, options.momentum);
  for (std::size_t step = 0; step < options.steps; ++step) {
    sgd.ZeroGrad();
    Backward(CrossEntropy(SoftmaxRows(probe.Forward(features)), labels));
    sgd.Step();
  }
  return Accuracy(probe.Forward(features), labels);
}

}  // namespace pcllab
