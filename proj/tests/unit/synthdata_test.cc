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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pcllab/errors.h"
#include "pcllab/model.h"
#include "pcllab/training.h"

namespace pcllab {
namespace {

// Accuracy of a model trained on source labels only (no few-shot, no
// contrastive weight), measured on both domains.
struct SourceOnly {
  double source = 0.0;
  double target = 0.0;
};

SourceOnly TrainSourceOnly(const ShiftSpec& shift, std::uint64_t seed,
                           std::size_t steps) {
  DatasetSpec spec;
  spec.shots = 0;
  spec.shift = shift;
  const SsdaProblem problem = MakeProblem(spec, seed);
  TrainConfig cfg;
  cfg.lambda_contrastive = 0.0;
  cfg.steps = steps;
  cfg.eval_interval = steps;
  cfg.seed = seed;
  const RunRecord run = Train(cfg, problem);
  EXPECT_FALSE(run.diverged);
  return {Accuracy(run.model.Forward(problem.source.points()).probs,
                   problem.source.labels()),
          Accuracy(run.model.Forward(problem.target.points()).probs,
                   problem.target.labels())};
}

TEST(SynthDataTest, ClassesAreBalanced) {
  for (std::size_t classes : {2u, 3u, 4u, 7u}) {
    const auto [source, target] =
        MakeDomainPair(classes, 25, DefaultBenchmarkShift(), 3);
    EXPECT_EQ(source.size(), classes * 25);
    for (const DomainDataset* d : {&source, &target}) {
      for (std::size_t count : d->ClassCounts()) {
        EXPECT_LE(std::abs(double(count) - 25.0), 1.0);
      }
    }
    EXPECT_EQ(source.domain(), Domain::kSource);
    EXPECT_EQ(target.domain(), Domain::kTarget);
  }
}

TEST(SynthDataTest, SeedDeterminesEverything) {
  const auto a = MakeDomainPair(4, 10, DefaultBenchmarkShift(), 11);
  const auto b = MakeDomainPair(4, 10, DefaultBenchmarkShift(), 11);
  const auto c = MakeDomainPair(4, 10, DefaultBenchmarkShift(), 12);
  EXPECT_EQ(a.second.points().ToRows(), b.second.points().ToRows());
  EXPECT_NE(a.second.points().ToRows(), c.second.points().ToRows());
}

TEST(SynthDataTest, NullShiftScoresEquallyOnBothDomains) {
  double source = 0.0, target = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SourceOnly acc = TrainSourceOnly(ShiftSpec::Identity(), seed, 300);
    source += acc.source / 5.0;
    target += acc.target / 5.0;
  }
  EXPECT_GT(source, 0.9);
  EXPECT_NEAR(source, target, 0.03);
}

TEST(SynthDataTest, HalfTurnIsChanceOrWorse) {
  ShiftSpec shift = ShiftSpec::Identity();
  shift.rotation = std::numbers::pi;
  double target = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    target += TrainSourceOnly(shift, seed, 300).target / 5.0;
  }
  EXPECT_LE(target, 0.25 + 0.1);
}

// Calibrated once: 5 seeds x 500 steps gave 63.0% mean target accuracy.
TEST(SynthDataTest, DefaultShiftSourceOnlyBand) {
  double target = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    target += TrainSourceOnly(DefaultBenchmarkShift(), seed, 500).target / 5.0;
  }
  EXPECT_GE(target, 0.55);
  EXPECT_LE(target, 0.72);
}

TEST(AugmentTest, ZeroStrengthIsIdentity) {
  const auto [source, target] = MakeDomainPair(4, 5, DefaultBenchmarkShift(), 1);
  const auto [a, b] = AugmentTwoViews(target.points(), 0.0, 9);
  EXPECT_EQ(a.ToRows(), target.points().ToRows());
  EXPECT_EQ(b.ToRows(), target.points().ToRows());
  EXPECT_EQ(StrongAugment(target.points(), 0.0, 9, 0.0).ToRows(),
            target.points().ToRows());
}

TEST(AugmentTest, DeterministicAndIndependentViews) {
  const auto [source, target] = MakeDomainPair(4, 5, DefaultBenchmarkShift(), 1);
  const auto [a1, b1] = AugmentTwoViews(target.points(), 0.3, 4);
  const auto [a2, b2] = AugmentTwoViews(target.points(), 0.3, 4);
  EXPECT_EQ(a1.ToRows(), a2.ToRows());
  EXPECT_EQ(b1.ToRows(), b2.ToRows());
  EXPECT_NE(a1.ToRows(), b1.ToRows());
}

TEST(AugmentTest, DisplacementStaysWithinEnvelope) {
  // Rotation by at most s moves a point by at most |x| s; jitter is N(0, s^2)
  // per coordinate, so 6 sigma in norm is a safe bound.
  const double s = 0.2;
  const auto [source, target] = MakeDomainPair(4, 50, DefaultBenchmarkShift(), 2);
  const Tensor& x = target.points();
  const auto [a, b] = AugmentTwoViews(x, s, 8);
  double mean_sq = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double r = std::hypot(x.at(i, 0), x.at(i, 1));
    const double d = std::hypot(a.at(i, 0) - x.at(i, 0), a.at(i, 1) - x.at(i, 1));
    EXPECT_LE(d, r * s + 6.0 * s);
    mean_sq += d * d / double(x.rows());
  }
  EXPECT_GT(mean_sq, 0.0);
}

TEST(AugmentTest, StrongMaskSaturatesAndMatchesRate) {
  const auto [source, target] = MakeDomainPair(4, 5, DefaultBenchmarkShift(), 1);
  const Tensor blank = StrongAugment(target.points(), 0.3, 3, 1.0);
  for (double v : blank.data()) {
    EXPECT_EQ(v, 0.0);
  }
  const Tensor ones = Tensor::Ones({5000, 2});
  const Tensor masked = StrongAugment(ones, 0.0, 5);
  std::size_t zeros = 0;
  for (double v : masked.data()) zeros += v == 0.0;
  EXPECT_NEAR(double(zeros) / 1e4, kStrongMaskProbability, 0.01);
}

TEST(SynthDataTest, CsvHasHeaderAndRows) {
  const auto [source, target] = MakeDomainPair(2, 3, DefaultBenchmarkShift(), 1);
  std::ostringstream os;
  target.WriteCsv(os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,y,label,domain");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_NE(line.find(",target"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 6u);
}

TEST(FewShotTest, CountsPerClassAndLabelsMatch) {
  const auto [source, target] = MakeDomainPair(4, 10, DefaultBenchmarkShift(), 1);
  const FewShotSplit split = MakeFewShotSplit(target, 3, 7);
  ASSERT_EQ(split.indices.size(), 12u);
  std::vector<std::size_t> per_class(4, 0);
  for (std::size_t k = 0; k < split.indices.size(); ++k) {
    EXPECT_EQ(split.labels[k], target.labels()[split.indices[k]]);
    ++per_class[split.labels[k]];
  }
  for (std::size_t c : per_class) EXPECT_EQ(c, 3u);
  EXPECT_TRUE(MakeFewShotSplit(target, 0, 7).indices.empty());
  EXPECT_THROW(MakeFewShotSplit(target, 11, 7), ConfigError);
}

TEST(SynthDataTest, InvalidConfigurationsThrow) {
  EXPECT_THROW(MakeDomainPair(1, 10, DefaultBenchmarkShift(), 1), ConfigError);
  ShiftSpec bad = DefaultBenchmarkShift();
  bad.scale = 0.0;
  EXPECT_THROW(MakeDomainPair(4, 10, bad, 1), ConfigError);
  bad = DefaultBenchmarkShift();
  bad.noise_sigma = -1.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  EXPECT_THROW(AugmentTwoViews(Tensor::Ones({2, 2}), -0.1, 1), ConfigError);
}

}  // namespace
}  // namespace pcllab
