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

#include "pcllab/synthdata.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "pcllab/errors.h"

namespace pcllab {

namespace {

using Engine = std::mt19937_64;

void CheckPoints(const Tensor& points, const char* who) {
  if (points.rank() != 2 || points.cols() != 2) {
    throw DimensionError(std::string(who) + ": expected N x 2 points, got " +
                         ShapeToString(points.shape()));
  }
}

// Rotate about the origin, then add isotropic jitter.
std::vector<double> JitteredRotation(std::span<const double> src,
                                     double max_angle, double sigma,
                                     Engine& rng) {
  std::uniform_real_distribution<double> angle(-max_angle, max_angle);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < src.size() / 2; ++i) {
    const double theta = max_angle > 0.0 ? angle(rng) : 0.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double x = src[2 * i], y = src[2 * i + 1];
    const double nx = noise(rng), ny = noise(rng);
    out[2 * i] = c * x - s * y + sigma * nx;
    out[2 * i + 1] = s * x + c * y + sigma * ny;
  }
  return out;
}

}  // namespace

std::string_view DomainName(Domain domain) {
  return domain == Domain::kSource ? "source" : "target";
}

void ShiftSpec::Validate() const {
  if (!(scale > 0.0)) throw ConfigError("ShiftSpec: scale must be positive");
  if (!(noise_sigma >= 0.0)) {
    throw ConfigError("ShiftSpec: noise_sigma must be nonnegative");
  }
}

ShiftSpec DefaultBenchmarkShift() { return {0.6, {1.0, 0.5}, 1.0, 0.35}; }

DomainDataset::DomainDataset(Tensor points, std::vector<std::size_t> labels,
                             Domain domain, std::size_t classes)
    : points_(std::move(points)),
      labels_(std::move(labels)),
      domain_(domain),
      classes_(classes) {
  CheckPoints(points_, "DomainDataset");
  if (points_.rows() != labels_.size()) {
    throw DimensionError("DomainDataset: one label per point required");
  }
  for (std::size_t label : labels_) {
    if (label >= classes_) throw ContractError("DomainDataset: bad label");
  }
}

std::vector<std::size_t> DomainDataset::ClassCounts() const {
  std::vector<std::size_t> counts(classes_, 0);
  for (std::size_t label : labels_) ++counts[label];
  return counts;
}

void DomainDataset::WriteCsv(std::ostream& os) const {
  os << "x,y,label,domain\n";
  const auto name = DomainName(domain_);
  os.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    os << points_.at(i, 0) << ',' << points_.at(i, 1) << ',' << labels_[i]
       << ',' << name << '\n';
  }
}

FewShotSplit MakeFewShotSplit(const DomainDataset& target,
                              std::size_t shots_per_class, std::uint64_t seed) {
  FewShotSplit split;
  split.shots_per_class = shots_per_class;
  Engine rng(seed);
  std::vector<std::vector<std::size_t>> by_class(target.classes());
  for (std::size_t i = 0; i < target.size(); ++i) {
    by_class[target.labels()[i]].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < shots_per_class) {
      throw ConfigError("MakeFewShotSplit: class " + std::to_string(c) +
                        " has only " + std::to_string(members.size()) +
                        " points");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < shots_per_class; ++k) {
      split.indices.push_back(members[k]);
      split.labels.push_back(c);
    }
  }
  return split;
}

std::pair<DomainDataset, DomainDataset> MakeDomainPair(
    std::size_t classes, std::size_t n_per_class, const ShiftSpec& shift,
    std::uint64_t seed, double radius) {
  if (classes < 2) throw ConfigError("MakeDomainPair: need at least 2 classes");
  if (n_per_class < 1) {
    throw ConfigError("MakeDomainPair: need at least 1 point per class");
  }
  if (!(radius > 0.0)) throw ConfigError("MakeDomainPair: radius must be > 0");
  shift.Validate();

  Engine rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double cr = std::cos(shift.rotation), sr = std::sin(shift.rotation);
  const std::size_t n = classes * n_per_class;

  std::vector<double> src(2 * n), tgt(2 * n);
  std::vector<std::size_t> labels(n);
  for (std::size_t c = 0; c < classes; ++c) {
    const double angle =
        2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    const double cx = radius * std::cos(angle), cy = radius * std::sin(angle);
    const double tx = shift.scale * (cr * cx - sr * cy) + shift.translation[0];
    const double ty = shift.scale * (sr * cx + cr * cy) + shift.translation[1];
    for (std::size_t k = 0; k < n_per_class; ++k) {
      const std::size_t i = c * n_per_class + k;
      labels[i] = c;
      src[2 * i] = cx + shift.noise_sigma * noise(rng);
      src[2 * i + 1] = cy + shift.noise_sigma * noise(rng);
    }
    for (std::size_t k = 0; k < n_per_class; ++k) {
      const std::size_t i = c * n_per_class + k;
      tgt[2 * i] = tx + shift.noise_sigma * noise(rng);
      tgt[2 * i + 1] = ty + shift.noise_sigma * noise(rng);
    }
  }
  DomainDataset source(Tensor({n, 2}, std::move(src)), labels, Domain::kSource,
                       classes);
  DomainDataset target(Tensor({n, 2}, std::move(tgt)), std::move(labels),
                       Domain::kTarget, classes);
  return {std::move(source), std::move(target)};
}

std::pair<Tensor, Tensor> AugmentTwoViews(const Tensor& points,
                                          double strength, std::uint64_t seed) {
  CheckPoints(points, "AugmentTwoViews");
  if (!(strength >= 0.0)) {
    throw ConfigError("AugmentTwoViews: strength must be nonnegative");
  }
  Engine rng(seed);
  auto a = JitteredRotation(points.data(), strength, strength, rng);
  auto b = JitteredRotation(points.data(), strength, strength, rng);
  return {Tensor(points.shape(), std::move(a)),
          Tensor(points.shape(), std::move(b))};
}

Tensor StrongAugment(const Tensor& points, double strength, std::uint64_t seed,
                     double mask_probability) {
  CheckPoints(points, "StrongAugment");
  if (!(strength >= 0.0)) {
    throw ConfigError("StrongAugment: strength must be nonnegative");
  }
  if (!(mask_probability >= 0.0 && mask_probability <= 1.0)) {
    throw ConfigError("StrongAugment: mask probability must lie in [0, 1]");
  }
  Engine rng(seed);
  auto out = JitteredRotation(points.data(), strength, 3.0 * strength, rng);
  std::bernoulli_distribution drop(mask_probability);
  for (double& v : out) {
    if (drop(rng)) v = 0.0;
  }
  return Tensor(points.shape(), std::move(out));
}

}  // namespace pcllab
