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

#include "pcllab/autodiff.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "pcllab/errors.h"

namespace pcllab {

using detail::Node;

GradTape::GradTape(const Tensor& root) : root_(NodeOf(root)) {
  if (!root_->requires_grad) return;
  // Iterative post-order DFS; a node is emitted after all of its inputs.
  std::unordered_set<const Node*> visited{root_.get()};
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
  stack.emplace_back(root_, 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      const auto& child = node->inputs[next++];
      if (child->requires_grad && visited.insert(child.get()).second) {
        stack.emplace_back(child, 0);
      }
      continue;
    }
    order_.push_back(std::move(node));
    stack.pop_back();
  }
}

void GradTape::Backward() {
  if (!root_->shape.empty() || root_->data.size() != 1) {
    throw ContractError("Backward: loss must be a scalar, got shape " +
                        ShapeToString(root_->shape));
  }
  if (!root_->requires_grad) return;
  for (auto& node : order_) {
    if (node->is_leaf()) {
      node->EnsureGrad();
    } else {
      node->grad.assign(node->data.size(), 0.0);
    }
  }
  root_->grad[0] += 1.0;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Node& node = **it;
    if (!node.is_leaf() && node.backward) node.backward(node);
  }
}

void Backward(const Tensor& loss) { GradTape(loss).Backward(); }

namespace {

double RelativeError(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max(std::abs(analytic) + std::abs(numeric) + 1e-12, floor);
}

}  // namespace

double FiniteDiffCheck(const ScalarFunction& f, const Tensor& x, double step,
                       double floor) {
  Tensor probe(x.shape(), std::vector<double>(x.data().begin(), x.data().end()),
               /*requires_grad=*/true);
  std::vector<Tensor> params{probe};
  return FiniteDiffCheck([&] { return f(probe); }, params, step, floor);
}

double FiniteDiffCheck(const std::function<Tensor()>& f,
                       std::span<Tensor> params, double step,
                       double floor) {
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.ZeroGrad();
  }
  Backward(f());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = f().item();
      values[i] = saved - step;
      const double down = f().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, RelativeError(analytic[k][i], numeric, floor));
    }
  }
  for (auto& p : params) p.ZeroGrad();
  return worst;
}

}  // namespace pcllab
