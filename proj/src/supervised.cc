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

#include "pcllab/supervised.h"

#include <algorithm>
#include <string>

#include "pcllab/errors.h"

namespace pcllab {

Tensor CrossEntropy(const Tensor& probs, std::span<const std::size_t> labels) {
  if (probs.rank() != 2) throw DimensionError("CrossEntropy: expected N x C");
  if (probs.rows() == 0) throw ContractError("CrossEntropy: empty batch");
  if (labels.size() != probs.rows()) {
    throw DimensionError("CrossEntropy: one label per row required");
  }
  for (std::size_t label : labels) {
    if (label >= probs.cols()) {
      throw ContractError("CrossEntropy: label " + std::to_string(label) +
                          " outside [0, " + std::to_string(probs.cols()) +
                          ")");
    }
  }
  Tensor picked = Clamp(SelectPerRow(probs, labels), kLogFloor, 1.0);
  return Neg(Mean(Log(picked)));
}

PseudoLabelResult PseudoLabelLoss(const Tensor& weak_probs,
                                  const Tensor& strong_probs,
                                  double confidence) {
  if (weak_probs.shape() != strong_probs.shape() || weak_probs.rank() != 2) {
    throw DimensionError("PseudoLabelLoss: views must share an N x C shape");
  }
  const std::size_t n = weak_probs.rows(), c = weak_probs.cols();
  PseudoLabelResult result;
  std::vector<std::size_t> targets;
  auto weak = weak_probs.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = weak.data() + i * c;
    const auto best = std::max_element(row, row + c);
    if (*best >= confidence) {
      result.rows.push_back(i);
      targets.push_back(static_cast<std::size_t>(best - row));
    }
  }
  result.retained = result.rows.size();
  if (result.retained == 0) {
    result.loss = Tensor::Scalar(0.0);
    return result;
  }
  result.loss = CrossEntropy(GatherRows(strong_probs, result.rows), targets);
  return result;
}

}  // namespace pcllab
