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

#include "pcllab/nn.h"

#include <cmath>

#include "pcllab/errors.h"

namespace pcllab {

namespace {

Tensor UniformInit(Shape shape, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(NumElements(shape));
  for (double& v : data) v = dist(rng);
  return Tensor(std::move(shape), std::move(data), /*requires_grad=*/true);
}

}  // namespace

Linear Linear::Init(std::size_t in, std::size_t out, bool with_bias,
                    Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear layer;
  layer.weight = UniformInit({out, in}, bound, rng);
  if (with_bias) layer.bias = UniformInit({1, out}, bound, rng);
  return layer;
}

Tensor Linear::Forward(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != in_features()) {
    throw DimensionError("Linear: expected input width " +
                         std::to_string(in_features()) + ", got shape " +
                         ShapeToString(x.shape()));
  }
  Tensor y = MatMul(x, Transpose(weight));
  if (bias) {
    // Row broadcast expressed as ones(n, 1) x b so adds stay equal-shape.
    y = y + MatMul(Tensor::Ones({x.rows(), 1}), *bias);
  }
  return y;
}

void Linear::CollectParameters(std::vector<Tensor>& out) const {
  out.push_back(weight);
  if (bias) out.push_back(*bias);
}

Mlp Mlp::Init(const std::vector<std::size_t>& widths, Activation activation,
              Rng& rng) {
  if (widths.empty()) throw ConfigError("Mlp: widths must not be empty");
  Mlp mlp;
  mlp.activation = activation;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    mlp.layers.push_back(Linear::Init(widths[i], widths[i + 1], true, rng));
  }
  return mlp;
}

Tensor Mlp::Forward(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i].Forward(h);
    const bool last = i + 1 == layers.size();
    if (!last || activate_output) {
      h = activation == Activation::kTanh ? Tanh(h) : Relu(h);
    }
  }
  return h;
}

std::vector<Tensor> Mlp::Parameters() const {
  std::vector<Tensor> out;
  for (const auto& layer : layers) layer.CollectParameters(out);
  return out;
}

void SgdUpdate(std::span<double> param, std::span<const double> grad,
               std::span<double> velocity, double lr, double momentum,
               double weight_decay) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad[i] + weight_decay * param[i];
    param[i] -= lr * velocity[i];
  }
}

Sgd::Sgd(std::vector<Tensor> params, double lr, double momentum,
         double weight_decay)
    : params_(std::move(params)),
      lr_(lr),
      momentum_(momentum),
      weight_decay_(weight_decay) {
  velocity_.reserve(params_.size());
  for (const auto& p : params_) velocity_.emplace_back(p.numel(), 0.0);
}

void Sgd::Step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const std::vector<double> g = params_[k].grad();
    SgdUpdate(params_[k].mutable_data(), g, velocity_[k], lr_, momentum_,
              weight_decay_);
  }
}

void Sgd::ZeroGrad() {
  for (auto& p : params_) p.ZeroGrad();
}

double ParameterChecksum(const std::vector<Tensor>& params) {
  double acc = 0.0;
  double position = 1.0;
  for (const auto& p : params) {
    for (double v : p.data()) {
      acc += v * position;
      position += 1.0;
    }
  }
  return acc;
}

bool AllFinite(const std::vector<Tensor>& params) {
  for (const auto& p : params) {
    for (double v : p.data()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace pcllab
