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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "pcllab/autodiff.h"
#include "pcllab/checks/oracles.h"
#include "pcllab/errors.h"
#include "pcllab/supervised.h"

namespace pcllab {
namespace {

namespace o = oracle;

// Fixed batch; expected values below were computed independently with numpy.
const std::vector<std::vector<double>> kA = {
    {0.5, -1.2, 0.3}, {1.1, 0.4, -0.7}, {-0.2, 0.9, 1.5}};
const std::vector<std::vector<double>> kB = {
    {0.4, -1.0, 0.6}, {1.3, 0.1, -0.5}, {-0.6, 1.1, 1.2}};

LossConfig Cfg(LossKind kind) {
  LossConfig cfg;
  cfg.kind = kind;
  return cfg;
}

Tensor Random(std::mt19937_64& rng, std::size_t r, std::size_t c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(r * c);
  for (double& x : v) x = n(rng);
  return Tensor({r, c}, v);
}

Tensor Probs(const std::vector<std::vector<double>>& logits) {
  return SoftmaxRows(Tensor::FromRows(logits));
}

TEST(OracleTest, InfoNceHandComputedTwoSampleCase) {
  const o::Matrix eye = {{1, 0}, {0, 1}};
  const double want = -std::log(std::exp(1.0) / (2.0 + std::exp(1.0)));
  EXPECT_NEAR(o::InfoNce(eye, eye, 1.0, false), want, 1e-15);
  EXPECT_NEAR(o::InfoNce(eye, eye, 1.0, true), want, 1e-15);
}

TEST(OracleTest, UniformClosedForms) {
  const o::Matrix u(5, std::vector<double>(4, 0.25));
  EXPECT_NEAR(o::InfoNce(u, u, 7.0, true), std::log(9.0), 1e-12);
  EXPECT_NEAR(o::Uniformity({{0.25, 0.25, 0.25, 0.25}}), 1.3862943611198906, 1e-15);
  EXPECT_NEAR(o::CrossEntropy(u, {0, 1, 2, 3, 0}), std::log(4.0), 1e-15);
}

TEST(OracleTest, FrozenValuesOnFixedBatch) {
  LossConfig cfg;
  const o::Matrix p = o::Softmax(kA), q = o::Softmax(kB);
  EXPECT_NEAR(o::Fcl(kA, kB, cfg), 0.0031939676324683752, 1e-15);
  EXPECT_NEAR(o::Pcl(p, q, cfg), 0.96496576025248548, 1e-14);
  EXPECT_NEAR(o::PclL2(p, q, cfg), 0.52152638766622605, 1e-14);
  EXPECT_NEAR(o::PclMse(p, q, cfg), 0.58552737506586305, 1e-14);
  EXPECT_NEAR(o::Bce(p, q, cfg), 18.299761389931458, 1e-12);
  EXPECT_NEAR(o::Uniformity(p), 3.9841247063405256, 1e-14);
  EXPECT_NEAR(o::CrossEntropy(p, {0, 2, 1}), 1.3835971243357308, 1e-14);
  cfg.sfcl_threshold = 0.15;
  EXPECT_NEAR(o::Sfcl(kA, kB, cfg), 0.001501377554927815, 1e-15);
  cfg.scale = 1.0;
  cfg.symmetrize = false;
  EXPECT_NEAR(o::Fcl(kA, kB, cfg), 0.80027781083320981, 1e-14);
}

TEST(LossesTest, FrozenValuesOnFixedBatch) {
  const Tensor a = Tensor::FromRows(kA), b = Tensor::FromRows(kB);
  const Tensor p = Probs(kA), q = Probs(kB);
  EXPECT_NEAR(FclLoss({a, b}, Cfg(LossKind::kFcl)).item(), 0.0031939676324683752, 1e-14);
  EXPECT_NEAR(PclLoss({p, q}, Cfg(LossKind::kPcl)).item(), 0.96496576025248548, 1e-13);
  EXPECT_NEAR(PclL2Loss({p, q}, Cfg(LossKind::kPclL2)).item(), 0.52152638766622605, 1e-13);
  EXPECT_NEAR(PclMseLoss({p, q}, Cfg(LossKind::kPclMse)).item(), 0.58552737506586305,
              1e-13);
  EXPECT_NEAR(BceLoss(p, q, Cfg(LossKind::kBce)).item(), 18.299761389931458, 1e-11);
  EXPECT_NEAR(UniformityRegularizer(p).item(), 3.9841247063405256, 1e-13);
  LossConfig sfcl = Cfg(LossKind::kSfcl);
  sfcl.sfcl_threshold = 0.15;
  EXPECT_NEAR(SfclLoss({a, b}, sfcl).item(), 0.001501377554927815, 1e-14);
}

TEST(LossesTest, InfoNceSingleSampleIsExactlyZero) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(InfoNceCore(Random(rng, 1, 5), Random(rng, 1, 5), 7.0).item(), 0.0);
  }
  const Tensor hot = Tensor::FromRows({{0, 1, 0}});
  EXPECT_EQ(PclLoss({hot, hot}, Cfg(LossKind::kPcl)).item(), 0.0);
  EXPECT_EQ(PclMseLoss({hot, hot}, Cfg(LossKind::kPclMse)).item(), 0.0);
}

TEST(LossesTest, InfoNceTwoSampleExample) {
  const Tensor eye = Tensor::Identity(2);
  const double want = -std::log(std::exp(1.0) / (2.0 + std::exp(1.0)));
  EXPECT_NEAR(InfoNceCore(eye, eye, 1.0, true).item(), want, 1e-15);
  EXPECT_NEAR(InfoNceCore(eye, eye, 1.0, false).item(), want, 1e-15);
}

TEST(LossesTest, EveryVariantMatchesOracleOnRandomBatches) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    std::uniform_int_distribution<std::size_t> nd(1, 4), cd(2, 5), dd(2, 6);
    const std::size_t n = nd(rng), c = cd(rng), d = dd(rng);
    LossConfig cfg;
    cfg.symmetrize = t % 2 == 0;
    cfg.sfcl_threshold = 0.5;
    const Tensor fa = Random(rng, n, d), fb = Random(rng, n, d);
    const Tensor za = Random(rng, n, c, 2.0), zb = Random(rng, n, c, 2.0);
    const Tensor pa = SoftmaxRows(za), pb = SoftmaxRows(zb);
    const auto FA = fa.ToRows(), FB = fb.ToRows(), PA = pa.ToRows(), PB = pb.ToRows();
    EXPECT_NEAR(FclLoss({fa, fb}, cfg).item(), o::Fcl(FA, FB, cfg), 1e-9);
    EXPECT_NEAR(LclLoss({za, zb}, cfg).item(), o::Lcl(za.ToRows(), zb.ToRows(), cfg), 1e-9);
    EXPECT_NEAR(PclLoss({pa, pb}, cfg).item(), o::Pcl(PA, PB, cfg), 1e-9);
    EXPECT_NEAR(PclL2Loss({pa, pb}, cfg).item(), o::PclL2(PA, PB, cfg), 1e-9);
    EXPECT_NEAR(PclMseLoss({pa, pb}, cfg).item(), o::PclMse(PA, PB, cfg), 1e-9);
    EXPECT_NEAR(BceLoss(pa, pb, cfg).item(), o::Bce(PA, PB, cfg), 1e-9);
    EXPECT_NEAR(SfclLoss({fa, fb}, cfg).item(), o::Sfcl(FA, FB, cfg), 1e-9);
    EXPECT_NEAR(UniformityRegularizer(pa).item(), o::Uniformity(PA), 1e-12);

    Rng head_rng(t);
    const ProjectionHead head = ProjectionHead::Init(d, head_rng);
    o::DenseLayer l1{head.mlp.layers[0].weight.ToRows(),
                     {head.mlp.layers[0].bias->data().begin(),
                      head.mlp.layers[0].bias->data().end()}};
    o::DenseLayer l2{head.mlp.layers[1].weight.ToRows(),
                     {head.mlp.layers[1].bias->data().begin(),
                      head.mlp.layers[1].bias->data().end()}};
    EXPECT_NEAR(NtclLoss({fa, fb}, head, cfg).item(), o::Ntcl(FA, FB, l1, l2, cfg), 1e-9);
  }
}

TEST(LossesTest, FclIsScaleInvariantAndIgnoresNormalizedInput) {
  std::mt19937_64 rng(2);
  const Tensor a = Random(rng, 4, 5), b = Random(rng, 4, 5);
  const LossConfig cfg = Cfg(LossKind::kFcl);
  const double base = FclLoss({a, b}, cfg).item();
  for (double alpha : {0.1, 1.0, 10.0}) {
    EXPECT_NEAR(FclLoss({Scale(a, alpha), Scale(b, alpha)}, cfg).item(), base, 1e-10);
  }
  const Tensor ua = L2Normalize(a), ub = L2Normalize(b);
  EXPECT_NEAR(FclLoss({ua, ub}, cfg).item(), InfoNceCore(ua, ub, cfg.scale).item(), 1e-14);
}

TEST(LossesTest, PclUniformClosedForm) {
  for (std::size_t n : {2, 3, 6}) {
    const Tensor u = Tensor::Full({n, 4}, 0.25);
    const double want = std::log(2.0 * n - 1.0);
    EXPECT_NEAR(PclLoss({u, u}, Cfg(LossKind::kPcl)).item(), want, 1e-10);
    EXPECT_NEAR(PclL2Loss({u, u}, Cfg(LossKind::kPclL2)).item(), want, 1e-10);
  }
}

TEST(LossesTest, PclRejectsNonProbabilityRows) {
  const Tensor good = Tensor::FromRows({{0.5, 0.5}});
  EXPECT_THROW(PclLoss({Tensor::FromRows({{0.6, 0.6}}), good}, Cfg(LossKind::kPcl)),
               ContractError);
  EXPECT_THROW(PclLoss({Tensor::FromRows({{1.5, -0.5}}), good}, Cfg(LossKind::kPcl)),
               ContractError);
  EXPECT_THROW(BceLoss(Tensor::FromRows({{0.9, 0.2}}), good, Cfg(LossKind::kBce)),
               ContractError);
  EXPECT_NO_THROW(PclLoss({Tensor::FromRows({{0.5 + 5e-7, 0.5}}), good},
                          Cfg(LossKind::kPcl)));
}

TEST(LossesTest, LclEqualsFclWhenLogitsAreFeatures) {
  std::mt19937_64 rng(3);
  const Tensor a = Random(rng, 3, 4), b = Random(rng, 3, 4);
  EXPECT_EQ(LclLoss({a, b}, Cfg(LossKind::kLcl)).item(),
            FclLoss({a, b}, Cfg(LossKind::kFcl)).item());
  const Model rig = Model::Identity(4);
  const ModelOutputs oa = rig.Forward(a), ob = rig.Forward(b);
  EXPECT_NEAR(ComputeLoss(Cfg(LossKind::kLcl), oa, ob).item(),
              ComputeLoss(Cfg(LossKind::kFcl), oa, ob).item(), 1e-15);
}

TEST(LossesTest, NtclWithIdentityHeadIsFcl) {
  std::mt19937_64 rng(4);
  const Tensor a = Random(rng, 3, 4), b = Random(rng, 3, 4);
  EXPECT_EQ(NtclLoss({a, b}, ProjectionHead::Identity(), Cfg(LossKind::kNtcl)).item(),
            FclLoss({a, b}, Cfg(LossKind::kFcl)).item());
}

TEST(LossesTest, NtclSendsGradientIntoHead) {
  Rng rng(5);
  const ProjectionHead head = ProjectionHead::Init(4, rng);
  std::mt19937_64 data_rng(5);
  Backward(NtclLoss({Random(data_rng, 4, 4), Random(data_rng, 4, 4)}, head,
                    Cfg(LossKind::kNtcl)));
  for (const auto& p : head.Parameters()) {
    double norm = 0.0;
    for (double g : p.grad()) norm += g * g;
    EXPECT_GT(norm, 0.0);
  }
}

TEST(LossesTest, PclL2EqualsPclOnOneHotRows) {
  const Tensor a = Tensor::FromRows({{1, 0, 0}, {0, 0, 1}, {0, 1, 0}});
  const Tensor b = Tensor::FromRows({{1, 0, 0}, {0, 1, 0}, {0, 1, 0}});
  EXPECT_NEAR(PclL2Loss({a, b}, Cfg(LossKind::kPclL2)).item(),
              PclLoss({a, b}, Cfg(LossKind::kPcl)).item(), 1e-14);
}

TEST(LossesTest, PclMseIdenticalViewsMatchOracle) {
  const Tensor p = Probs(kA);
  EXPECT_NEAR(PclMseLoss({p, p}, Cfg(LossKind::kPclMse)).item(),
              o::PclMse(p.ToRows(), p.ToRows(), Cfg(LossKind::kPclMse)), 1e-12);
}

TEST(LossesTest, BcePerfectCasesAreZero) {
  const Tensor hot = Tensor::FromRows({{0, 1, 0}});
  EXPECT_EQ(BceLoss(hot, hot, Cfg(LossKind::kBce)).item(), 0.0);
  const Tensor two = Tensor::FromRows({{1, 0}, {0, 1}});
  EXPECT_EQ(BceLoss(two, two, Cfg(LossKind::kBce)).item(), 0.0);
}

TEST(LossesTest, BceTargetsCarryNoGradient) {
  // The target indicator is piecewise constant; with the cross pair above the
  // threshold the analytic gradient must still match finite differences.
  Tensor z({2, 2}, {2.0, -2.0, 1.9, -2.1}, true);
  const LossConfig cfg = Cfg(LossKind::kBce);
  EXPECT_LT(FiniteDiffCheck([&] { return BceLoss(SoftmaxRows(z), SoftmaxRows(z), cfg); },
                            std::span<Tensor>(&z, 1)),
            1e-6);
}

TEST(LossesTest, SfclThresholdOneIsFcl) {
  std::mt19937_64 rng(6);
  const Tensor a = Random(rng, 4, 3), b = Random(rng, 4, 3);
  LossConfig cfg = Cfg(LossKind::kSfcl);
  cfg.sfcl_threshold = 1.0;
  EXPECT_EQ(SfclLoss({a, b}, cfg).item(), FclLoss({a, b}, Cfg(LossKind::kFcl)).item());
}

TEST(LossesTest, SfclDropsDuplicateNegative) {
  const Tensor a = Tensor::FromRows({{1, 0.2}, {1, 0.2}, {-0.3, 1}});
  const Tensor b = Tensor::FromRows({{0.9, 0.3}, {1.1, 0.1}, {-0.2, 1.2}});
  const double sfcl = SfclLoss({a, b}, Cfg(LossKind::kSfcl)).item();
  const double fcl = FclLoss({a, b}, Cfg(LossKind::kFcl)).item();
  EXPECT_LT(sfcl, fcl);
  EXPECT_NEAR(sfcl, o::Sfcl(a.ToRows(), b.ToRows(), Cfg(LossKind::kSfcl)), 1e-12);
}

TEST(LossesTest, UniformityRegularizerExamples) {
  EXPECT_NEAR(UniformityRegularizer(Tensor::Full({1, 4}, 0.25)).item(),
              1.3862943611198906, 1e-15);
  EXPECT_EQ(UniformityRegularizer(Tensor::Zeros({0, 4})).item(), 0.0);
  // A hard zero is clamped rather than producing infinity.
  EXPECT_NEAR(UniformityRegularizer(Tensor::FromRows({{1.0, 0.0}})).item(),
              -0.5 * std::log(1e-12), 1e-9);
}

TEST(LossesTest, InfoNceFamilyIsNonNegative) {
  std::mt19937_64 rng(9);
  const ProjectionHead head = ProjectionHead::Identity();
  for (int t = 0; t < 30; ++t) {
    const Tensor a = Random(rng, 5, 4, 3.0), b = Random(rng, 5, 4, 3.0);
    const Tensor pa = SoftmaxRows(a), pb = SoftmaxRows(b);
    EXPECT_GE(FclLoss({a, b}, Cfg(LossKind::kFcl)).item(), -1e-12);
    EXPECT_GE(PclLoss({pa, pb}, Cfg(LossKind::kPcl)).item(), -1e-12);
    EXPECT_GE(PclL2Loss({pa, pb}, Cfg(LossKind::kPclL2)).item(), -1e-12);
    EXPECT_GE(PclMseLoss({pa, pb}, Cfg(LossKind::kPclMse)).item(), -1e-12);
    EXPECT_GE(SfclLoss({a, b}, Cfg(LossKind::kSfcl)).item(), -1e-12);
    EXPECT_GE(NtclLoss({a, b}, head, Cfg(LossKind::kNtcl)).item(), -1e-12);
  }
}

TEST(LossesTest, PermutingBothViewsLeavesEveryLossUnchanged) {
  std::mt19937_64 rng(10);
  const Tensor a = Random(rng, 6, 4), b = Random(rng, 6, 4);
  std::vector<std::size_t> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const Model rig = Model::Identity(4);
  Rng head_rng(1);
  const ProjectionHead head = ProjectionHead::Init(4, head_rng);
  for (LossKind kind : kAllLossKinds) {
    const double before =
        ComputeLoss(Cfg(kind), rig.Forward(a), rig.Forward(b), &head).item();
    const double after = ComputeLoss(Cfg(kind), rig.Forward(GatherRows(a, perm)),
                                     rig.Forward(GatherRows(b, perm)), &head)
                             .item();
    EXPECT_NEAR(before, after, 1e-10) << LossKindName(kind);
  }
}

TEST(LossesTest, ComputeLossDispatchesToTheRightRepresentation) {
  std::mt19937_64 rng(11);
  const Tensor a = Random(rng, 3, 4), b = Random(rng, 3, 4);
  const Model rig = Model::Identity(4);
  const ModelOutputs oa = rig.Forward(a), ob = rig.Forward(b);
  Rng head_rng(2);
  const ProjectionHead head = ProjectionHead::Init(4, head_rng);
  EXPECT_EQ(ComputeLoss(Cfg(LossKind::kPcl), oa, ob).item(),
            PclLoss({oa.probs, ob.probs}, Cfg(LossKind::kPcl)).item());
  EXPECT_EQ(ComputeLoss(Cfg(LossKind::kFcl), oa, ob).item(),
            FclLoss({oa.features, ob.features}, Cfg(LossKind::kFcl)).item());
  EXPECT_EQ(ComputeLoss(Cfg(LossKind::kBce), oa, ob).item(),
            BceLoss(oa.probs, ob.probs, Cfg(LossKind::kBce)).item());
  EXPECT_EQ(ComputeLoss(Cfg(LossKind::kNtcl), oa, ob, &head).item(),
            NtclLoss({oa.features, ob.features}, head, Cfg(LossKind::kNtcl)).item());
  EXPECT_THROW(ComputeLoss(Cfg(LossKind::kNtcl), oa, ob), ConfigError);
}

TEST(LossesTest, ConfigAndShapeErrors) {
  LossConfig bad;
  bad.scale = 0.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = {};
  bad.bce_threshold = 1.5;
  EXPECT_THROW(bad.Validate(), ConfigError);
  bad = {};
  bad.sfcl_threshold = 0.0;
  EXPECT_THROW(bad.Validate(), ConfigError);
  EXPECT_THROW(FclLoss({Tensor::Ones({2, 3}), Tensor::Ones({3, 3})}, {}), DimensionError);
  EXPECT_THROW(FclLoss({Tensor::Zeros({0, 3}), Tensor::Zeros({0, 3})}, {}), ContractError);
  EXPECT_THROW(FclLoss({Tensor::FromRows({{0, 0}}), Tensor::FromRows({{1, 0}})}, {}),
               DegenerateInputError);
  EXPECT_EQ(ParseLossKind("PCL_MSE"), LossKind::kPclMse);
  EXPECT_THROW(ParseLossKind("pcl"), ConfigError);
  for (LossKind kind : kAllLossKinds) EXPECT_EQ(ParseLossKind(LossKindName(kind)), kind);
}

TEST(SupervisedTest, CrossEntropyExamples) {
  const Tensor hot = Tensor::FromRows({{0, 1, 0}, {1, 0, 0}});
  EXPECT_EQ(CrossEntropy(hot, std::vector<std::size_t>{1, 0}).item(), 0.0);
  const Tensor u = Tensor::Full({3, 5}, 0.2);
  EXPECT_NEAR(CrossEntropy(u, std::vector<std::size_t>{4, 0, 2}).item(), std::log(5.0),
              1e-15);
  EXPECT_THROW(CrossEntropy(u, std::vector<std::size_t>{5, 0, 2}), ContractError);
  EXPECT_THROW(CrossEntropy(u, std::vector<std::size_t>{0, 0}), DimensionError);
}

TEST(SupervisedTest, CrossEntropyMatchesOracle) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const Tensor p = SoftmaxRows(Random(rng, 4, 3, 2.0));
    const std::vector<std::size_t> labels = {0, 2, 1, 2};
    EXPECT_NEAR(CrossEntropy(p, labels).item(), o::CrossEntropy(p.ToRows(), labels),
                1e-12);
  }
}

TEST(SupervisedTest, PseudoLabelExamples) {
  const Tensor soft = Tensor::Full({3, 2}, 0.5);
  const auto none = PseudoLabelLoss(soft, soft, 0.95);
  EXPECT_EQ(none.loss.item(), 0.0);
  EXPECT_EQ(none.retained, 0u);

  const Tensor hot = Tensor::FromRows({{1, 0}, {0, 1}, {0, 1}});
  const auto all = PseudoLabelLoss(hot, hot, 0.95);
  EXPECT_EQ(all.loss.item(), 0.0);
  EXPECT_EQ(all.retained, 3u);

  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const Tensor w = SoftmaxRows(Random(rng, 6, 3, 3.0));
    const Tensor s = SoftmaxRows(Random(rng, 6, 3, 3.0));
    EXPECT_NEAR(PseudoLabelLoss(w, s, 0.7).loss.item(),
                o::PseudoLabel(w.ToRows(), s.ToRows(), 0.7), 1e-12);
  }
}

TEST(SupervisedTest, PseudoLabelWeakSideGetsNoGradient) {
  Tensor zw({2, 2}, {3.0, -3.0, 0.0, 4.0}, true);
  Tensor zs({2, 2}, {0.1, 0.2, 0.3, -0.1}, true);
  Backward(PseudoLabelLoss(SoftmaxRows(zw), SoftmaxRows(zs), 0.9).loss);
  for (double g : zw.grad()) EXPECT_EQ(g, 0.0);
  double norm = 0.0;
  for (double g : zs.grad()) norm += std::abs(g);
  EXPECT_GT(norm, 0.0);
}

}  // namespace
}  // namespace pcllab
