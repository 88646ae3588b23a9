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

#ifndef PCLLAB_AUTODIFF_H_
#define PCLLAB_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pcllab/tensor.h"

namespace pcllab {

// Ordered record of the operations that produced `root`, restricted to nodes
// that require grad. Order is topological (inputs before consumers), so the
// backward pass walks it in reverse and visits each node exactly once.
//
// Gradients on leaves accumulate across passes; interior grads are reset at
// the start of every pass.
class GradTape {
 public:
  explicit GradTape(const Tensor& root);

  std::size_t size() const { return order_.size(); }

  // Seeds d(root)/d(root) = 1 and propagates. Root must be a scalar.
  void Backward();

 private:
  std::shared_ptr<detail::Node> root_;
  std::vector<std::shared_ptr<detail::Node>> order_;
};

// Convenience: GradTape(loss).Backward(). Throws ContractError when `loss`
// is not a rank-0 scalar.
void Backward(const Tensor& loss);

using ScalarFunction = std::function<Tensor(const Tensor&)>;

// Central-difference gradient check of `f` at `x`. Returns
//   max_i |analytic_i - numeric_i| / max(|analytic_i| + |numeric_i| + 1e-12, floor).
// With the default floor of 0 this is the plain relative error. A positive
// floor stops coordinates whose true gradient is zero from reporting
// rounding noise as error. `x` itself is not modified.
inline constexpr double kGradCheckFloor = 0.0;
double FiniteDiffCheck(const ScalarFunction& f, const Tensor& x,
                       double step = 1e-5, double floor = kGradCheckFloor);

// Same check over an arbitrary set of leaf parameters used by `f`. The
// parameters are perturbed in place and restored; their grads are cleared.
double FiniteDiffCheck(const std::function<Tensor()>& f,
                       std::span<Tensor> params, double step = 1e-5,
                       double floor = kGradCheckFloor);

}  // namespace pcllab

#endif  // PCLLAB_AUTODIFF_H_
