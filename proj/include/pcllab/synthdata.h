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

// Seeded planar domain-adaptation problems and two-view augmentations.

#ifndef PCLLAB_SYNTHDATA_H_
#define PCLLAB_SYNTHDATA_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pcllab/tensor.h"

namespace pcllab {

enum class Domain { kSource, kTarget };
std::string_view DomainName(Domain domain);

// Target = scale * R(rotation) * class_center + translation + N(0, sigma^2).
struct ShiftSpec {
  double rotation = 0.0;
  std::array<double, 2> translation = {0.0, 0.0};
  double scale = 1.0;
  // Per-coordinate noise of both domains.
  double noise_sigma = 0.35;

  static ShiftSpec Identity(double noise_sigma = 0.35) {
    return {0.0, {0.0, 0.0}, 1.0, noise_sigma};
  }
  void Validate() const;
};

// Rotation 0.6 rad, translation (1.0, 0.5), sigma 0.35.
ShiftSpec DefaultBenchmarkShift();

// Radius of the circle the class centers sit on.
inline constexpr double kDefaultClusterRadius = 2.0;

class DomainDataset {
 public:
  DomainDataset(Tensor points, std::vector<std::size_t> labels, Domain domain,
                std::size_t classes);

  const Tensor& points() const { return points_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t classes() const { return classes_; }
  Domain domain() const { return domain_; }

  // Source labels are training data. Target labels are for evaluation and
  // diagnostics only; training sees them through FewShotSplit.
  std::span<const std::size_t> labels() const { return labels_; }

  std::vector<std::size_t> ClassCounts() const;

  // Columns: x,y,label,domain.
  void WriteCsv(std::ostream& os) const;

 private:
  Tensor points_;
  std::vector<std::size_t> labels_;
  Domain domain_;
  std::size_t classes_;
};

struct FewShotSplit {
  std::size_t shots_per_class = 0;
  std::vector<std::size_t> indices;
  // Labels of `indices`, in the same order.
  std::vector<std::size_t> labels;
};

// Samples `shots_per_class` target indices per class. Throws ConfigError
// if a class has fewer points than requested.
FewShotSplit MakeFewShotSplit(const DomainDataset& target,
                              std::size_t shots_per_class, std::uint64_t seed);

// C Gaussian blobs on a circle (source) and the same blobs moved by `shift`
// with fresh noise (target). n_per_class points per class in each domain.
std::pair<DomainDataset, DomainDataset> MakeDomainPair(
    std::size_t classes, std::size_t n_per_class, const ShiftSpec& shift,
    std::uint64_t seed, double radius = kDefaultClusterRadius);

// Two independent views: each point rotated about the origin by
// U(-strength, strength) radians, then jittered by N(0, strength^2).
std::pair<Tensor, Tensor> AugmentTwoViews(const Tensor& points,
                                          double strength, std::uint64_t seed);

inline constexpr double kStrongMaskProbability = 0.1;

// Like one view of AugmentTwoViews with 3x jitter, then each coordinate
// zeroed with probability `mask_probability`.
Tensor StrongAugment(const Tensor& points, double strength, std::uint64_t seed,
                     double mask_probability = kStrongMaskProbability);

}  // namespace pcllab

#endif  // PCLLAB_SYNTHDATA_H_
