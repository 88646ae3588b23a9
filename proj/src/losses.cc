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

#include "pcllab/losses.h"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcllab/errors.h"
#include "pcllab/supervised.h"

namespace pcllab {

namespace {

constexpr double kProbabilitySumTolerance = 1e-6;

using Similarity = Tensor (*)(const Tensor&, const Tensor&);

Tensor InnerProduct(const Tensor& a, const Tensor& b) {
  return MatMul(a, Transpose(b));
}

Tensor NegSquaredDistance(const Tensor& a, const Tensor& b) {
  return Neg(PairwiseSquaredDistance(a, b));
}

// One query direction (queries from `a`). When `drop_above` is set, any
// negative whose detached similarity exceeds it leaves the denominator.
Tensor DirectionalLoss(const Tensor& a, const Tensor& b, double scale,
                       Similarity sim, std::optional<double> drop_above) {
  const std::size_t n = a.rows();
  const Tensor same = sim(a, a);
  const Tensor cross = sim(a, b);

  std::vector<std::uint8_t> include(n * 2 * n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t* row = include.data() + i * 2 * n;
    row[i] = 0;
    if (!drop_above) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && same.at(i, j) > *drop_above) row[j] = 0;
      if (j != i && cross.at(i, j) > *drop_above) row[n + j] = 0;
    }
  }
  const Tensor logits = ConcatCols(Scale(same, scale), Scale(cross, scale));
  const Tensor positive = Scale(Diagonal(cross), scale);
  return Mean(Sub(LogSumExpRows(logits, include), positive));
}

Tensor Contrastive(const Tensor& a, const Tensor& b, double scale,
                   bool symmetrize, Similarity sim,
                   std::optional<double> drop_above = std::nullopt) {
  Tensor forward = DirectionalLoss(a, b, scale, sim, drop_above);
  if (!symmetrize) return forward;
  Tensor backward = DirectionalLoss(b, a, scale, sim, drop_above);
  return Scale(Add(forward, backward), 0.5);
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* who) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw DimensionError(std::string(who) + ": views must share an N x d shape, got " +
                         ShapeToString(a.shape()) + " and " +
                         ShapeToString(b.shape()));
  }
  if (a.rows() == 0) throw ContractError(std::string(who) + ": empty batch");
}

}  // namespace

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kFcl:
      return "FCL";
    case LossKind::kPcl:
      return "PCL";
    case LossKind::kLcl:
      return "LCL";
    case LossKind::kNtcl:
      return "NTCL";
    case LossKind::kPclL2:
      return "PCL_L2";
    case LossKind::kPclMse:
      return "PCL_MSE";
    case LossKind::kBce:
      return "BCE";
    case LossKind::kSfcl:
      return "SFCL";
  }
  throw ConfigError("LossKindName: unknown kind");
}

LossKind ParseLossKind(std::string_view name) {
  for (LossKind kind : kAllLossKinds) {
    if (LossKindName(kind) == name) return kind;
  }
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

void LossConfig::Validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ConfigError("LossConfig: scale must be positive");
  }
  if (!(bce_threshold > 0.0 && bce_threshold <= 1.0)) {
    throw ConfigError("LossConfig: bce_threshold must lie in (0, 1]");
  }
  if (!(sfcl_threshold > 0.0 && sfcl_threshold <= 1.0)) {
    throw ConfigError("LossConfig: sfcl_threshold must lie in (0, 1]");
  }
}

void PairedEmbeddings::Validate() const {
  RequireSameShape(view_a, view_b, "PairedEmbeddings");
}

void RequireProbabilityRows(const Tensor& probs, const char* who) {
  if (probs.rank() != 2) {
    throw DimensionError(std::string(who) + ": expected N x C probabilities");
  }
  const std::size_t c = probs.cols();
  auto d = probs.data();
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double v = d[i * c + j];
      if (!(v >= 0.0)) {
        throw ContractError(std::string(who) + ": row " + std::to_string(i) +
                            " has a negative or NaN entry");
      }
      total += v;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
      throw ContractError(std::string(who) + ": row " + std::to_string(i) +
                          " sums to " + std::to_string(total));
    }
  }
}

Tensor InfoNceCore(const Tensor& view_a, const Tensor& view_b, double scale,
                   bool symmetrize) {
  RequireSameShape(view_a, view_b, "InfoNceCore");
  return Contrastive(view_a, view_b, scale, symmetrize, InnerProduct);
}

Tensor FclLoss(const PairedEmbeddings& features, const LossConfig& cfg) {
  cfg.Validate();
  features.Validate();
  return InfoNceCore(L2Normalize(features.view_a), L2Normalize(features.view_b),
                     cfg.scale, cfg.symmetrize);
}

Tensor PclLoss(const PairedEmbeddings& probs, const LossConfig& cfg) {
  cfg.Validate();
  probs.Validate();
  RequireProbabilityRows(probs.view_a, "PclLoss");
  RequireProbabilityRows(probs.view_b, "PclLoss");
  return InfoNceCore(probs.view_a, probs.view_b, cfg.scale, cfg.symmetrize);
}

Tensor LclLoss(const PairedEmbeddings& logits, const LossConfig& cfg) {
  cfg.Validate();
  logits.Validate();
  return InfoNceCore(L2Normalize(logits.view_a), L2Normalize(logits.view_b),
                     cfg.scale, cfg.symmetrize);
}

Tensor NtclLoss(const PairedEmbeddings& features, const ProjectionHead& head,
                const LossConfig& cfg) {
  cfg.Validate();
  features.Validate();
  return InfoNceCore(L2Normalize(head.Forward(features.view_a)),
                     L2Normalize(head.Forward(features.view_b)), cfg.scale,
                     cfg.symmetrize);
}

Tensor PclL2Loss(const PairedEmbeddings& probs, const LossConfig& cfg) {
  cfg.Validate();
  probs.Validate();
  RequireProbabilityRows(probs.view_a, "PclL2Loss");
  RequireProbabilityRows(probs.view_b, "PclL2Loss");
  return InfoNceCore(L2Normalize(probs.view_a), L2Normalize(probs.view_b),
                     cfg.scale, cfg.symmetrize);
}

Tensor PclMseLoss(const PairedEmbeddings& probs, const LossConfig& cfg) {
  cfg.Validate();
  probs.Validate();
  RequireProbabilityRows(probs.view_a, "PclMseLoss");
  RequireProbabilityRows(probs.view_b, "PclMseLoss");
  return Contrastive(probs.view_a, probs.view_b, cfg.scale, cfg.symmetrize,
                     NegSquaredDistance);
}

Tensor BceLoss(const Tensor& probs_view0, const Tensor& probs_view1,
               const LossConfig& cfg) {
  cfg.Validate();
  RequireSameShape(probs_view0, probs_view1, "BceLoss");
  RequireProbabilityRows(probs_view0, "BceLoss");
  RequireProbabilityRows(probs_view1, "BceLoss");
  const std::size_t n = probs_view0.rows();
  const Tensor* views[2] = {&probs_view0, &probs_view1};

  Tensor total = Tensor::Scalar(0.0);
  for (const Tensor* left : views) {
    for (const Tensor* right : views) {
      const Tensor p = MatMul(*left, Transpose(*right));
      std::vector<double> target(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j || p.at(i, j) >= cfg.bce_threshold) target[i * n + j] = 1.0;
        }
      }
      std::vector<double> complement(n * n);
      for (std::size_t k = 0; k < target.size(); ++k) {
        complement[k] = 1.0 - target[k];
      }
      const Tensor y({n, n}, std::move(target));
      const Tensor not_y({n, n}, std::move(complement));
      const Tensor log_p = Log(Clamp(p, kLogFloor, 1.0));
      const Tensor log_not_p = Log(Clamp(AddScalar(Neg(p), 1.0), kLogFloor, 1.0));
      total = Add(total, Sum(Add(Mul(y, log_p), Mul(not_y, log_not_p))));
    }
  }
  return Neg(total);
}

Tensor SfclLoss(const PairedEmbeddings& features, const LossConfig& cfg) {
  cfg.Validate();
  features.Validate();
  std::optional<double> drop_above;
  if (cfg.sfcl_threshold < 1.0) drop_above = cfg.sfcl_threshold;
  return Contrastive(L2Normalize(features.view_a), L2Normalize(features.view_b),
                     cfg.scale, cfg.symmetrize, InnerProduct, drop_above);
}

Tensor UniformityRegularizer(const Tensor& probs) {
  if (probs.rank() != 2) {
    throw DimensionError("UniformityRegularizer: expected N x C");
  }
  if (probs.rows() == 0) return Tensor::Scalar(0.0);
  const double inv_c = 1.0 / static_cast<double>(probs.cols());
  return Scale(Sum(Log(Clamp(probs, kLogFloor, 1.0))), -inv_c);
}

Tensor ComputeLoss(const LossConfig& cfg, const ModelOutputs& view_a,
                   const ModelOutputs& view_b, const ProjectionHead* head) {
  const PairedEmbeddings features{view_a.features, view_b.features};
  const PairedEmbeddings logits{view_a.logits, view_b.logits};
  const PairedEmbeddings probs{view_a.probs, view_b.probs};
  switch (cfg.kind) {
    case LossKind::kFcl:
      return FclLoss(features, cfg);
    case LossKind::kPcl:
      return PclLoss(probs, cfg);
    case LossKind::kLcl:
      return LclLoss(logits, cfg);
    case LossKind::kNtcl:
      if (head == nullptr) {
        throw ConfigError("ComputeLoss: NTCL needs a projection head");
      }
      return NtclLoss(features, *head, cfg);
    case LossKind::kPclL2:
      return PclL2Loss(probs, cfg);
    case LossKind::kPclMse:
      return PclMseLoss(probs, cfg);
    case LossKind::kBce:
      return BceLoss(view_a.probs, view_b.probs, cfg);
    case LossKind::kSfcl:
      return SfclLoss(features, cfg);
  }
  throw ConfigError("ComputeLoss: unknown loss kind");
}

}  // namespace pcllab
