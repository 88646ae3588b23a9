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

// Layers shared by the encoder, the classifier and the projection head.

#ifndef PCLLAB_NN_H_
#define PCLLAB_NN_H_

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "pcllab/tensor.h"

namespace pcllab {

using Rng = std::mt19937_64;

// y = x W^T (+ b). W is out x in so each row is one output direction.
struct Linear {
  Tensor weight;
  std::optional<Tensor> bias;

  // W, b ~ U(-1/sqrt(in), 1/sqrt(in)).
  static Linear Init(std::size_t in, std::size_t out, bool with_bias,
                     Rng& rng);

  std::size_t in_features() const { return weight.cols(); }
  std::size_t out_features() const { return weight.rows(); }

  Tensor Forward(const Tensor& x) const;
  void CollectParameters(std::vector<Tensor>& out) const;
};

enum class Activation { kTanh, kRelu };

// Stack of Linear layers with `activation` between layers. An empty layer
// list is the identity map.
struct Mlp {
  std::vector<Linear> layers;
  Activation activation = Activation::kTanh;
  bool activate_output = false;

  // widths = {in, h1, ..., out}. A single width yields the identity.
  static Mlp Init(const std::vector<std::size_t>& widths,
                  Activation activation, Rng& rng);

  Tensor Forward(const Tensor& x) const;
  std::vector<Tensor> Parameters() const;
};

// Classical momentum SGD:
//   v <- momentum * v + g + weight_decay * theta
//   theta <- theta - lr * v
class Sgd {
 public:
  Sgd(std::vector<Tensor> params, double lr, double momentum = 0.0,
      double weight_decay = 0.0);

  void Step();
  void ZeroGrad();

  double lr() const { return lr_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> velocity_;
  double lr_;
  double momentum_;
  double weight_decay_;
};

// One update of the rule above with explicit state; Sgd::Step applies it to
// every parameter.
void SgdUpdate(std::span<double> param, std::span<const double> grad,
               std::span<double> velocity, double lr, double momentum,
               double weight_decay);

// Checksum over every element, for detecting unintended mutation.
double ParameterChecksum(const std::vector<Tensor>& params);

bool AllFinite(const std::vector<Tensor>& params);

}  // namespace pcllab

#endif  // PCLLAB_NN_H_
