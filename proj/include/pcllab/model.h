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

// Encoder + linear classifier pair. The classifier has no bias so each
// weight row is the direction of its class.

#ifndef PCLLAB_MODEL_H_
#define PCLLAB_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcllab/nn.h"
#include "pcllab/tensor.h"

namespace pcllab {

struct ModelConfig {
  std::size_t input_dim = 2;
  std::size_t hidden = 64;
  std::size_t feature_dim = 16;
  std::size_t classes = 4;

  void Validate() const;
};

struct ModelOutputs {
  Tensor features;  // N x d
  Tensor logits;    // N x C, features x W^T
  Tensor probs;     // N x C, SoftmaxRows(logits)
};

struct Model {
  ModelConfig config;
  // widths {input_dim, hidden, hidden, feature_dim}, tanh between layers.
  Mlp encoder;
  // C x d, no bias.
  Linear classifier;

  static Model Init(const ModelConfig& config, Rng& rng);
  // Test rig: identity encoder and identity classifier (d = C = dim).
  static Model Identity(std::size_t dim);

  ModelOutputs Forward(const Tensor& batch) const;
  Tensor EncodeFeatures(const Tensor& batch) const;

  const Tensor& class_weights() const { return classifier.weight; }
  std::vector<Tensor> EncoderParameters() const { return encoder.Parameters(); }
  std::vector<Tensor> Parameters() const;
};

// 2-layer projection head d -> d -> d with a ReLU in between. An empty head
// is the identity.
struct ProjectionHead {
  Mlp mlp;

  static ProjectionHead Init(std::size_t dim, Rng& rng);
  static ProjectionHead Identity() { return {}; }

  Tensor Forward(const Tensor& features) const { return mlp.Forward(features); }
  std::vector<Tensor> Parameters() const { return mlp.Parameters(); }
};

std::vector<std::size_t> ArgmaxRows(const Tensor& scores);
double Accuracy(const Tensor& scores, std::span<const std::size_t> labels);
double MeanMaxProbability(const Tensor& probs);

struct ProbeOptions {
  std::size_t steps = 500;
  double lr = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

// Freezes the encoder, fits a freshly initialized classifier on the frozen
// features with cross-entropy against ground-truth labels, and returns that
// classifier's accuracy on the same points. The model is not modified.
double FreezeEncoderRetrainClassifier(const Model& model, const Tensor& points,
                                      std::span<const std::size_t> labels,
                                      const ProbeOptions& options = {});

}  // namespace pcllab

#endif  // PCLLAB_MODEL_H_
