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

// Label-driven training terms.

#ifndef PCLLAB_SUPERVISED_H_
#define PCLLAB_SUPERVISED_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pcllab/tensor.h"

namespace pcllab {

// Lower clamp applied to every probability before a log.
inline constexpr double kLogFloor = 1e-12;

// mean_i -log(clamp(p[i, label_i])). Throws ContractError for labels
// outside [0, C) or an empty batch.
Tensor CrossEntropy(const Tensor& probs, std::span<const std::size_t> labels);

struct PseudoLabelResult {
  Tensor loss;
  std::size_t retained = 0;
  // Row indices whose weak max-probability reached the confidence bar.
  std::vector<std::size_t> rows;
};

// Cross-entropy of `strong_probs` against the argmax of `weak_probs`, over
// rows whose weak max-probability is >= confidence. The weak side only
// selects targets and never receives gradient. Loss is 0 when no row passes.
PseudoLabelResult PseudoLabelLoss(const Tensor& weak_probs,
                                  const Tensor& strong_probs,
                                  double confidence);

}  // namespace pcllab

#endif  // PCLLAB_SUPERVISED_H_
