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


#include "pcllab/model.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pcllab/autodiff.h"
#include "pcllab/errors.h"
#include "pcllab/losses.h"
#include "pcllab/nn.h"
#include "pcllab/synthdata.h"

namespace pcllab {
namespace {

Tensor Random(std::mt19937_64& rng, std::size_t r, std::size_t c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(r * c);
  for (double& x : v) x = n(rng);
  return Tensor({r, c}, v);
}

TEST(ModelTest, OutputsFollowTheirDefinitions) {
  Rng rng(1);
  const Model model = Model::Init(ModelConfig{}, rng);
  std::mt19937_64 data(1);
  const ModelOutputs out = model.Forward(Random(data, 5, 2));
  EXPECT_EQ(out.features.shape(), (Shape{5, 16}));
  EXPECT_EQ(out.logits.shape(), (Shape{5, 4}));
  const Tensor logits = MatMul(out.features, Transpose(model.class_weights()));
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(out.logits.at(i, c), logits.at(i, c));
      s += out.probs.at(i, c);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ModelTest, ZeroClassifierGivesUniformProbabilities) {
  Rng rng(2);
  Model model = Model::Init(ModelConfig{}, rng);
  for (double& w : model.classifier.weight.mutable_data()) w = 0.0;
  std::mt19937_64 data(2);
  const ModelOutputs out = model.Forward(Random(data, 3, 2));
  for (double p : out.probs.data()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(ModelTest, IdentityRigIsSoftmaxOfInputs) {
  const Model rig = Model::Identity(3);
  const Tensor x = Tensor::FromRows({{1, 2, 3}, {0, -1, 4}});
  EXPECT_EQ(rig.Forward(x).probs.ToRows(), SoftmaxRows(x).ToRows());
}

TEST(ModelTest, WidthMismatchIsDimensionError) {
  Rng rng(3);
  const Model model = Model::Init(ModelConfig{}, rng);
  EXPECT_THROW(model.Forward(Tensor::Zeros({2, 3})), DimensionError);
}

TEST(ModelTest, SameSeedSameBits) {
  Rng r1(9), r2(9);
  const Model a = Model::Init(ModelConfig{}, r1);
  const Model b = Model::Init(ModelConfig{}, r2);
  std::mt19937_64 data(4);
  const Tensor x = Random(data, 7, 2);
  EXPECT_EQ(a.Forward(x).probs.ToRows(), b.Forward(x).probs.ToRows());
}

TEST(ModelTest, InitWithinFanInBounds) {
  Rng rng(5);
  const Model model = Model::Init(ModelConfig{}, rng);
  for (const Linear& layer : model.encoder.layers) {
    const double bound = 1.0 / std::sqrt(double(layer.in_features()));
    for (double w : layer.weight.data()) EXPECT_LE(std::abs(w), bound);
  }
  EXPECT_FALSE(model.classifier.bias.has_value());
  EXPECT_EQ(model.class_weights().shape(), (Shape{4, 16}));
  EXPECT_EQ(model.encoder.layers.size(), 3u);
}

TEST(ModelTest, ConfigValidation) {
  ModelConfig cfg;
  cfg.classes = 1;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.feature_dim = 0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
}

TEST(ModelTest, ClassWeightsGetGradientOnlyFromProbabilityLosses) {
  Rng rng(6);
  const Model model = Model::Init(ModelConfig{}, rng);
  const ProjectionHead head = ProjectionHead::Init(16, rng);
  std::mt19937_64 data(6);
  const Tensor a = Random(data, 6, 2), b = Random(data, 6, 2);
  for (LossKind kind : kAllLossKinds) {
    for (auto& p : model.Parameters()) p.ZeroGrad();
    LossConfig cfg;
    cfg.kind = kind;
    Backward(ComputeLoss(cfg, model.Forward(a), model.Forward(b), &head));
    double norm = 0.0;
    for (double g : model.class_weights().grad()) norm += g * g;
    const bool feature_only =
        kind == LossKind::kFcl || kind == LossKind::kNtcl || kind == LossKind::kSfcl;
    if (feature_only) {
      EXPECT_EQ(norm, 0.0) << LossKindName(kind);
    } else {
      EXPECT_GT(std::sqrt(norm), 1e-8) << LossKindName(kind);
    }
  }
}

TEST(SgdTest, PlainGradientStep) {
  Tensor theta = Tensor::Scalar(1.0, true);
  Sgd sgd({theta}, 0.1);
  Backward(Mul(theta, theta));
  sgd.Step();
  EXPECT_DOUBLE_EQ(theta.item(), 0.8);
}

TEST(SgdTest, MomentumMatchesUnrolledRecurrence) {
  Tensor theta = Tensor::Scalar(1.0, true);
  const double lr = 0.1, mu = 0.9, wd = 0.01;
  Sgd sgd({theta}, lr, mu, wd);
  double t = 1.0, v = 0.0;
  for (int step = 0; step < 2; ++step) {
    sgd.ZeroGrad();
    Backward(Mul(theta, theta));
    sgd.Step();
    v = mu * v + 2.0 * t + wd * t;
    t -= lr * v;
  }
  // Hand values: v1 = 2.01, t1 = 0.799; v2 = 0.9*2.01 + 1.598 + 0.00799.
  EXPECT_NEAR(t, 0.799 - 0.1 * (1.809 + 1.598 + 0.00799), 1e-15);
  EXPECT_DOUBLE_EQ(theta.item(), t);
}

TEST(SgdTest, ChecksumAndFiniteness) {
  Tensor a({2}, {1.0, 2.0}), b({1}, {3.0});
  const double before = ParameterChecksum({a, b});
  EXPECT_EQ(before, ParameterChecksum({a, b}));
  a.mutable_data()[0] = 1.5;
  EXPECT_NE(before, ParameterChecksum({a, b}));
  EXPECT_TRUE(AllFinite({a, b}));
  b.mutable_data()[0] = NAN;
  EXPECT_FALSE(AllFinite({a, b}));
}

TEST(ProbeTest, SeparableFeaturesReachFullAccuracy) {
  const Model rig = Model::Identity(3);
  const Tensor points = Tensor::FromRows(
      {{3, 0, 0}, {2, 0.5, 0}, {0, 3, 0}, {0.4, 2, 0}, {0, 0, 3}, {0.2, 0.1, 2}});
  const std::vector<std::size_t> labels = {0, 0, 1, 1, 2, 2};
  EXPECT_EQ(FreezeEncoderRetrainClassifier(rig, points, labels), 1.0);
}

TEST(ProbeTest, LabelIndependentFeaturesNearChance) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const Model model = Model::Init(ModelConfig{}, rng);
    std::mt19937_64 data(100 + seed);
    const Tensor points = Random(data, 400, 2);
    std::vector<std::size_t> labels(400);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 4;
    std::shuffle(labels.begin(), labels.end(), data);
    ProbeOptions opts;
    opts.seed = seed;
    total += FreezeEncoderRetrainClassifier(model, points, labels, opts);
  }
  EXPECT_NEAR(total / 5.0, 0.25, 0.1);
}

TEST(ProbeTest, EncoderIsNeverModified) {
  Rng rng(7);
  const Model model = Model::Init(ModelConfig{}, rng);
  const double before = ParameterChecksum(model.Parameters());
  std::mt19937_64 data(7);
  const Tensor points = Random(data, 40, 2);
  std::vector<std::size_t> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = i % 4;
  FreezeEncoderRetrainClassifier(model, points, labels);
  EXPECT_EQ(before, ParameterChecksum(model.Parameters()));
  EXPECT_THROW(FreezeEncoderRetrainClassifier(model, Tensor::Zeros({0, 2}), {}),
               ContractError);
}

TEST(MetricsTest, ArgmaxAccuracyAndMaxProb) {
  const Tensor p = Tensor::FromRows({{0.1, 0.9}, {0.6, 0.4}, {0.3, 0.7}});
  EXPECT_EQ(ArgmaxRows(p), (std::vector<std::size_t>{1, 0, 1}));
  EXPECT_DOUBLE_EQ(Accuracy(p, std::vector<std::size_t>{1, 1, 1}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(MeanMaxProbability(p), (0.9 + 0.6 + 0.7) / 3.0);
}

}  // namespace
}  // namespace pcllab
