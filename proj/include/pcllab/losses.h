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

// Contrastive losses over paired views.
//
// Every InfoNCE-style variant shares one denominator layout. For query i of
// view a with scale s and similarity sim:
//
//   l_i = -log  exp(s sim(a_i, b_i)) /
//               ( sum_{j != i} exp(s sim(a_i, a_j)) + sum_k exp(s sim(a_i, b_k)) )
//
// The same-view sum skips the query itself; the cross-view sum runs over
// every k, positive included. Losses average over i, and with
// `symmetrize` also average the a->b and b->a directions.
//
// The variants differ only in what is fed in:
//   FCL      l2-normalized encoder features
//   PCL      softmax probabilities, no normalization
//   LCL      l2-normalized logits
//   NTCL     l2-normalized projection-head output of the features
//   PCL_L2   l2-normalized probabilities
//   PCL_MSE  probabilities with sim(p, q) = -||p - q||^2
//   SFCL     FCL with near-duplicate negatives dropped from the denominator
// BCE is a pairwise binary cross-entropy over probability inner products.

#ifndef PCLLAB_LOSSES_H_
#define PCLLAB_LOSSES_H_

#include <array>
#include <string>
#include <string_view>

#include "pcllab/model.h"
#include "pcllab/tensor.h"

namespace pcllab {

enum class LossKind { kFcl, kPcl, kLcl, kNtcl, kPclL2, kPclMse, kBce, kSfcl };

inline constexpr std::array<LossKind, 8> kAllLossKinds = {
    LossKind::kFcl,  LossKind::kPcl,    LossKind::kLcl, LossKind::kNtcl,
    LossKind::kPclL2, LossKind::kPclMse, LossKind::kBce, LossKind::kSfcl};

// "FCL", "PCL", "LCL", "NTCL", "PCL_L2", "PCL_MSE", "BCE", "SFCL".
std::string_view LossKindName(LossKind kind);
// Throws ConfigError on an unknown name.
LossKind ParseLossKind(std::string_view name);

// Default scale for classification-style problems; 20 is the documented
// alternative for dense-prediction settings.
inline constexpr double kDefaultScale = 7.0;
inline constexpr double kDenseScale = 20.0;

struct LossConfig {
  LossKind kind = LossKind::kPcl;
  double scale = kDefaultScale;
  double bce_threshold = 0.95;
  // Negatives with normalized similarity strictly above this are dropped.
  // At 1 or above nothing is ever dropped.
  double sfcl_threshold = 0.95;
  bool symmetrize = true;

  // Throws ConfigError unless scale > 0 and both thresholds lie in (0, 1].
  void Validate() const;
};

// Two views of the same N samples. Both N x d, N >= 1.
struct PairedEmbeddings {
  Tensor view_a;
  Tensor view_b;

  void Validate() const;
};

// InfoNCE with inner-product similarity on inputs used as given.
Tensor InfoNceCore(const Tensor& view_a, const Tensor& view_b, double scale,
                   bool symmetrize = true);

Tensor FclLoss(const PairedEmbeddings& features, const LossConfig& cfg);
// Rows must be probability vectors (sum to 1 within 1e-6, nonnegative).
Tensor PclLoss(const PairedEmbeddings& probs, const LossConfig& cfg);
Tensor LclLoss(const PairedEmbeddings& logits, const LossConfig& cfg);
Tensor NtclLoss(const PairedEmbeddings& features, const ProjectionHead& head,
                const LossConfig& cfg);
Tensor PclL2Loss(const PairedEmbeddings& probs, const LossConfig& cfg);
Tensor PclMseLoss(const PairedEmbeddings& probs, const LossConfig& cfg);

// -sum_{i,j,n,m} [y log p + (1 - y) log(1 - p)] with p = p^n_i . p^m_j over
// both view pairings, y = 1 iff p >= cfg.bce_threshold or i == j. Targets come
// from detached values; logs are clamped to [1e-12, 1].
Tensor BceLoss(const Tensor& probs_view0, const Tensor& probs_view1,
               const LossConfig& cfg);

Tensor SfclLoss(const PairedEmbeddings& features, const LossConfig& cfg);

// -sum_i sum_j (1/C) log p_ij over the given rows (log clamped). Zero rows
// give 0.
Tensor UniformityRegularizer(const Tensor& probs);

// Throws ContractError when a row is not a probability vector.
void RequireProbabilityRows(const Tensor& probs, const char* who);

// Routes to the variant named by cfg.kind, feeding it features (FCL, NTCL,
// SFCL), logits (LCL) or probabilities (PCL, PCL_L2, PCL_MSE, BCE). `head` is
// required for NTCL.
Tensor ComputeLoss(const LossConfig& cfg, const ModelOutputs& view_a,
                   const ModelOutputs& view_b,
                   const ProjectionHead* head = nullptr);

}  // namespace pcllab

#endif  // PCLLAB_LOSSES_H_
