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


#include "pcllab/checks/acceptance.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "pcllab/autodiff.h"
#include "pcllab/checks/oracles.h"
#include "pcllab/errors.h"
#include "pcllab/losses.h"
#include "pcllab/nn.h"
#include "pcllab/serialization.h"
#include "pcllab/supervised.h"

namespace pcllab::acceptance {

namespace {

using oracle::Matrix;
using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t Uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Tensor RandomTensor(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0,
                    bool requires_grad = false) {
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> data(rows * cols);
  for (double& v : data) v = normal(rng);
  return Tensor({rows, cols}, std::move(data), requires_grad);
}

bool IsProbabilityKind(LossKind kind) {
  return kind == LossKind::kPcl || kind == LossKind::kPclL2 ||
         kind == LossKind::kPclMse || kind == LossKind::kBce;
}

// Applies `kind` to two raw views. Probability kinds see softmax rows, the
// rest see the raw rows as features or logits.
Tensor LossOnViews(LossKind kind, const Tensor& a, const Tensor& b,
                   const LossConfig& cfg, const ProjectionHead& head) {
  if (IsProbabilityKind(kind)) {
    const Tensor pa = SoftmaxRows(a), pb = SoftmaxRows(b);
    switch (kind) {
      case LossKind::kPcl:
        return PclLoss({pa, pb}, cfg);
      case LossKind::kPclL2:
        return PclL2Loss({pa, pb}, cfg);
      case LossKind::kPclMse:
        return PclMseLoss({pa, pb}, cfg);
      default:
        return BceLoss(pa, pb, cfg);
    }
  }
  switch (kind) {
    case LossKind::kFcl:
      return FclLoss({a, b}, cfg);
    case LossKind::kLcl:
      return LclLoss({a, b}, cfg);
    case LossKind::kNtcl:
      return NtclLoss({a, b}, head, cfg);
    default:
      return SfclLoss({a, b}, cfg);
  }
}

double OracleOnViews(LossKind kind, const Matrix& a, const Matrix& b,
                     const LossConfig& cfg, const ProjectionHead& head) {
  if (IsProbabilityKind(kind)) {
    const Matrix pa = oracle::Softmax(a), pb = oracle::Softmax(b);
    switch (kind) {
      case LossKind::kPcl:
        return oracle::Pcl(pa, pb, cfg);
      case LossKind::kPclL2:
        return oracle::PclL2(pa, pb, cfg);
      case LossKind::kPclMse:
        return oracle::PclMse(pa, pb, cfg);
      default:
        return oracle::Bce(pa, pb, cfg);
    }
  }
  switch (kind) {
    case LossKind::kFcl:
      return oracle::Fcl(a, b, cfg);
    case LossKind::kLcl:
      return oracle::Lcl(a, b, cfg);
    case LossKind::kNtcl: {
      oracle::DenseLayer layers[2];
      for (int k = 0; k < 2; ++k) {
        const Linear& lin = head.mlp.layers[k];
        layers[k].weight = lin.weight.ToRows();
        layers[k].bias.assign(lin.bias->data().begin(), lin.bias->data().end());
      }
      return oracle::Ntcl(a, b, layers[0], layers[1], cfg);
    }
    default:
      return oracle::Sfcl(a, b, cfg);
  }
}

LossConfig ConfigFor(LossKind kind, bool symmetrize) {
  LossConfig cfg;
  cfg.kind = kind;
  cfg.symmetrize = symmetrize;
  // Low enough that some negatives are actually filtered.
  cfg.sfcl_threshold = 0.6;
  return cfg;
}

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

Verdict Finish(int id, std::string name, bool passed, std::string detail,
               Clock::time_point start) {
  return {id, std::move(name), passed, std::move(detail), SecondsSince(start)};
}

std::vector<std::size_t> RandomLabels(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) l = Uniform(rng, 0, classes - 1);
  return labels;
}

}  // namespace

Verdict GradientSuite() {
  const auto start = Clock::now();
  constexpr int kInstances = 20;
  constexpr double kTolerance = 1e-4;
  // Coordinates with |analytic| + |numeric| below this are judged on an
  // absolute scale (a dead ReLU head can make a gradient exactly zero).
  constexpr double kFloor = 1e-6;
  Rng rng(101);
  double worst = 0.0;
  std::string worst_name;
  auto track = [&](double err, const std::string& name) {
    if (err > worst || std::isnan(err)) {
      worst = std::isnan(err) ? INFINITY : err;
      worst_name = name;
    }
  };

  for (LossKind kind : kAllLossKinds) {
    for (int t = 0; t < kInstances; ++t) {
      const std::size_t n = Uniform(rng, 2, 4);
      const std::size_t width =
          IsProbabilityKind(kind) || kind == LossKind::kLcl ? Uniform(rng, 2, 5)
                                                            : Uniform(rng, 2, 6);
      const LossConfig cfg = ConfigFor(kind, t % 2 == 0);
      ProjectionHead head = ProjectionHead::Identity();
      if (kind == LossKind::kNtcl) head = ProjectionHead::Init(width, rng);
      std::vector<Tensor> params = {RandomTensor(rng, n, width, 1.5, true),
                                    RandomTensor(rng, n, width, 1.5, true)};
      for (const auto& p : head.Parameters()) params.push_back(p);
      const Tensor a = params[0], b = params[1];
      track(FiniteDiffCheck([&] { return LossOnViews(kind, a, b, cfg, head); }, params,
                            1e-5, kFloor),
            std::string(LossKindName(kind)));
    }
  }
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = Uniform(rng, 1, 4), c = Uniform(rng, 2, 5);
    const auto labels = RandomLabels(rng, n, c);
    const Tensor logits = RandomTensor(rng, n, c, 1.5);
    track(FiniteDiffCheck([&](const Tensor& z) {
            return CrossEntropy(SoftmaxRows(z), labels);
          }, logits, 1e-5, kFloor),
          "CE");
    track(FiniteDiffCheck([](const Tensor& z) {
            return UniformityRegularizer(SoftmaxRows(z));
          }, logits, 1e-5, kFloor),
          "regularizer");
  }
  const bool runtime_ok = SecondsSince(start) < 30.0;
  return Finish(1, "gradient suite", worst < kTolerance && runtime_ok,
                "max rel err " + Fmt(worst) + " (" + worst_name + "), 10 targets x " +
                    std::to_string(kInstances) + " instances",
                start);
}

Verdict OracleSuite() {
  const auto start = Clock::now();
  constexpr int kBatches = 50;
  constexpr double kTolerance = 1e-9;
  Rng rng(202);
  double worst = 0.0;
  std::string worst_name;
  auto track = [&](double got, double want, const std::string& name) {
    const double diff = std::abs(got - want);
    if (!(diff <= worst)) {
      worst = std::isnan(diff) ? INFINITY : diff;
      worst_name = name;
    }
  };
  for (LossKind kind : kAllLossKinds) {
    for (int t = 0; t < kBatches; ++t) {
      const std::size_t n = Uniform(rng, 1, 8), width = Uniform(rng, 2, 8);
      const LossConfig cfg = ConfigFor(kind, t % 2 == 0);
      ProjectionHead head = ProjectionHead::Identity();
      if (kind == LossKind::kNtcl) head = ProjectionHead::Init(width, rng);
      const Tensor a = RandomTensor(rng, n, width, 2.0);
      const Tensor b = RandomTensor(rng, n, width, 2.0);
      track(LossOnViews(kind, a, b, cfg, head).item(),
            OracleOnViews(kind, a.ToRows(), b.ToRows(), cfg, head),
            std::string(LossKindName(kind)));
    }
  }
  for (int t = 0; t < kBatches; ++t) {
    const std::size_t n = Uniform(rng, 1, 8), c = Uniform(rng, 2, 6);
    const Tensor logits = RandomTensor(rng, n, c, 3.0);
    const Tensor strong_logits = RandomTensor(rng, n, c, 3.0);
    const Tensor probs = SoftmaxRows(logits);
    const Matrix p = oracle::Softmax(logits.ToRows());
    const Matrix q = oracle::Softmax(strong_logits.ToRows());
    const auto labels = RandomLabels(rng, n, c);
    track(CrossEntropy(probs, labels).item(), oracle::CrossEntropy(p, labels), "CE");
    track(UniformityRegularizer(probs).item(), oracle::Uniformity(p), "regularizer");
    track(PseudoLabelLoss(probs, SoftmaxRows(strong_logits), 0.7).loss.item(),
          oracle::PseudoLabel(p, q, 0.7), "pseudo-label");
    const Matrix got = probs.ToRows();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) track(got[i][j], p[i][j], "softmax");
    }
  }
  const bool runtime_ok = SecondsSince(start) < 30.0;
  return Finish(2, "oracle suite", worst <= kTolerance && runtime_ok,
                "max abs diff " + Fmt(worst) + " (" + worst_name + "), " +
                    std::to_string(kBatches) + " batches per variant",
                start);
}

Verdict BoundSuite() {
  const auto start = Clock::now();
  Rng rng(303);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t pairs = 0, bound_violations = 0, equality_failures = 0,
              strict_failures = 0, strict_checked = 0, one_hot_pairs = 0;

  auto make = [&](std::size_t c) {
    std::vector<double> p(c);
    const double kind = unit(rng);
    if (kind < 0.15) {
      p[Uniform(rng, 0, c - 1)] = 1.0;
    } else if (kind < 0.4) {
      const double eps = std::pow(10.0, -9.0 + 7.0 * unit(rng));
      const std::size_t hot = Uniform(rng, 0, c - 1);
      for (std::size_t k = 0; k < c; ++k) p[k] = k == hot ? 1.0 - eps : eps / (c - 1);
    } else {
      std::normal_distribution<double> normal(0.0, 0.1 + 8.0 * unit(rng));
      double total = 0.0;
      for (double& v : p) total += (v = std::exp(normal(rng)));
      for (double& v : p) v /= total;
    }
    return p;
  };
  auto entropy = [](const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
      if (v > 0.0) h -= v * std::log(v);
    }
    return h;
  };

  for (std::size_t c = 2; c <= 6; ++c) {
    constexpr std::size_t kPerWidth = 2000;
    Matrix p_rows, q_rows;
    for (std::size_t i = 0; i < kPerWidth; ++i) {
      p_rows.push_back(make(c));
      q_rows.push_back(make(c));
    }
    // Constructed equality cases: identical one-hot vectors.
    for (std::size_t k = 0; k < c; ++k) {
      std::vector<double> hot(c, 0.0);
      hot[k] = 1.0;
      p_rows.push_back(hot);
      q_rows.push_back(hot);
    }
    const Tensor dots =
        SumRows(Mul(Tensor::FromRows(p_rows), Tensor::FromRows(q_rows)));
    for (std::size_t i = 0; i < p_rows.size(); ++i) {
      const double v = dots.at(i);
      const bool p_hot = entropy(p_rows[i]) == 0.0, q_hot = entropy(q_rows[i]) == 0.0;
      if (i >= kPerWidth) {
        ++one_hot_pairs;
        if (v != 1.0) ++equality_failures;
        continue;
      }
      ++pairs;
      if (!(v <= 1.0)) ++bound_violations;
      if (v == 1.0 && !(p_hot && q_hot && p_rows[i] == q_rows[i])) ++equality_failures;
      if (p_hot && q_hot && p_rows[i] == q_rows[i] && v != 1.0) ++equality_failures;
      if (entropy(p_rows[i]) > 1e-6 || entropy(q_rows[i]) > 1e-6) {
        ++strict_checked;
        if (!(1.0 - v > 1e-9)) ++strict_failures;
      }
    }
  }
  const bool ok = pairs >= 10000 && bound_violations == 0 && equality_failures == 0 &&
                  strict_failures == 0;
  return Finish(3, "inner-product bound", ok,
                std::to_string(pairs) + " random pairs, " +
                    std::to_string(bound_violations) + " bound violations, " +
                    std::to_string(equality_failures) + " equality failures (" +
                    std::to_string(one_hot_pairs) + " one-hot pairs), " +
                    std::to_string(strict_failures) + "/" +
                    std::to_string(strict_checked) + " strictness failures",
                start);
}

Verdict ClosedForms() {
  const auto start = Clock::now();
  double worst_pcl = 0.0, worst_sym = 0.0, worst_reg = 0.0;
  std::size_t nonzero_single = 0;
  for (std::size_t n : {1, 2, 3, 5, 8, 16}) {
    for (std::size_t c : {2, 3, 4, 7}) {
      for (double scale : {1.0, 7.0, 20.0}) {
        const Tensor uniform = Tensor::Full({n, c}, 1.0 / static_cast<double>(c));
        LossConfig cfg;
        cfg.scale = scale;
        cfg.symmetrize = true;
        const double sym = PclLoss({uniform, uniform}, cfg).item();
        cfg.symmetrize = false;
        const double one_way = PclLoss({uniform, uniform}, cfg).item();
        worst_pcl = std::max(worst_pcl,
                             std::abs(sym - std::log(2.0 * static_cast<double>(n) - 1.0)));
        worst_sym = std::max(worst_sym, std::abs(sym - one_way));
      }
    }
  }
  for (std::size_t c = 2; c <= 12; ++c) {
    const Tensor row = Tensor::Full({1, c}, 1.0 / static_cast<double>(c));
    worst_reg = std::max(
        worst_reg, std::abs(UniformityRegularizer(row).item() - std::log(double(c))));
  }
  Rng rng(404);
  for (int t = 0; t < 20; ++t) {
    const std::size_t width = Uniform(rng, 2, 6);
    const Tensor a = RandomTensor(rng, 1, width, 2.0), b = RandomTensor(rng, 1, width, 2.0);
    if (InfoNceCore(a, b, 7.0, t % 2 == 0).item() != 0.0) ++nonzero_single;
    const ProjectionHead head = ProjectionHead::Init(width, rng);
    for (LossKind kind : kAllLossKinds) {
      if (kind == LossKind::kBce) continue;
      if (LossOnViews(kind, a, b, ConfigFor(kind, t % 2 == 0), head).item() != 0.0) {
        ++nonzero_single;
      }
    }
  }
  const bool ok = worst_pcl < 1e-10 && worst_sym < 1e-10 && worst_reg < 1e-12 &&
                  nonzero_single == 0;
  return Finish(4, "closed forms", ok,
                "uniform PCL err " + Fmt(worst_pcl) + ", symmetrize diff " +
                    Fmt(worst_sym) + ", regularizer err " + Fmt(worst_reg) + ", " +
                    std::to_string(nonzero_single) + " nonzero N=1 losses",
                start);
}

Verdict InvarianceSuite() {
  const auto start = Clock::now();
  Rng rng(505);
  double worst_scale = 0.0, worst_shift = 0.0, worst_perm = 0.0;
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = Uniform(rng, 2, 8), width = Uniform(rng, 2, 6);
    const Tensor a = RandomTensor(rng, n, width, 1.5), b = RandomTensor(rng, n, width, 1.5);
    const LossConfig fcl = ConfigFor(LossKind::kFcl, t % 2 == 0);
    const double base = FclLoss({a, b}, fcl).item();
    for (double alpha : {0.1, 10.0}) {
      worst_scale = std::max(
          worst_scale,
          std::abs(FclLoss({Scale(a, alpha), Scale(b, alpha)}, fcl).item() - base));
    }

    const LossConfig pcl = ConfigFor(LossKind::kPcl, t % 2 == 0);
    const double pcl_base = PclLoss({SoftmaxRows(a), SoftmaxRows(b)}, pcl).item();
    Matrix sa = a.ToRows(), sb = b.ToRows();
    std::normal_distribution<double> shift(0.0, 5.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double da = shift(rng), db = shift(rng);
      for (double& v : sa[i]) v += da;
      for (double& v : sb[i]) v += db;
    }
    worst_shift = std::max(
        worst_shift,
        std::abs(PclLoss({SoftmaxRows(Tensor::FromRows(sa)),
                          SoftmaxRows(Tensor::FromRows(sb))},
                         pcl)
                     .item() -
                 pcl_base));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const ProjectionHead head = ProjectionHead::Init(width, rng);
    for (LossKind kind : kAllLossKinds) {
      const LossConfig cfg = ConfigFor(kind, t % 2 == 0);
      const double before = LossOnViews(kind, a, b, cfg, head).item();
      const double after =
          LossOnViews(kind, GatherRows(a, perm), GatherRows(b, perm), cfg, head).item();
      worst_perm = std::max(worst_perm, std::abs(before - after));
    }
  }
  const bool ok = worst_scale < 1e-10 && worst_shift < 1e-10 && worst_perm < 1e-10;
  return Finish(5, "invariances", ok,
                "FCL scaling diff " + Fmt(worst_scale) + ", PCL logit shift diff " +
                    Fmt(worst_shift) + ", permutation diff " + Fmt(worst_perm),
                start);
}

Verdict ClassWeightGradients() {
  const auto start = Clock::now();
  double max_zero_side = 0.0, min_nonzero_side = INFINITY;
  std::string weakest;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(600 + seed);
    const Model model = Model::Init(ModelConfig{}, rng);
    const ProjectionHead head = ProjectionHead::Init(model.config.feature_dim, rng);
    const Tensor points = RandomTensor(rng, 8, 2, 2.0);
    const auto [view_a, view_b] = AugmentTwoViews(points, 0.2, seed);
    for (LossKind kind : kAllLossKinds) {
      for (auto& p : model.Parameters()) p.ZeroGrad();
      for (auto& p : head.Parameters()) p.ZeroGrad();
      LossConfig cfg;
      cfg.kind = kind;
      Backward(ComputeLoss(cfg, model.Forward(view_a), model.Forward(view_b), &head));
      double norm = 0.0;
      for (double g : model.class_weights().grad()) norm += g * g;
      norm = std::sqrt(norm);
      const bool expect_zero = kind == LossKind::kFcl || kind == LossKind::kNtcl ||
                               kind == LossKind::kSfcl;
      if (expect_zero) {
        max_zero_side = std::max(max_zero_side, norm);
      } else if (norm < min_nonzero_side) {
        min_nonzero_side = norm;
        weakest = LossKindName(kind);
      }
    }
  }
  const bool ok = max_zero_side == 0.0 && min_nonzero_side > 1e-8;
  return Finish(6, "class-weight gradient structure", ok,
                "max |dL/dW| for FCL/NTCL/SFCL " + Fmt(max_zero_side) +
                    ", min for probability/logit losses " + Fmt(min_nonzero_side) +
                    " (" + weakest + ")",
                start);
}

double FreeLogitMaxProb(LossKind kind, std::size_t n, std::size_t classes,
                        std::size_t steps, double lr, std::uint64_t seed) {
  Rng rng(seed);
  const Tensor a = RandomTensor(rng, n, classes, 1.0, true);
  const Tensor b = RandomTensor(rng, n, classes, 1.0, true);
  Sgd sgd({a, b}, lr);
  const LossConfig cfg = ConfigFor(kind, true);
  const ProjectionHead head = ProjectionHead::Identity();
  for (std::size_t step = 0; step < steps; ++step) {
    sgd.ZeroGrad();
    Backward(LossOnViews(kind, a, b, cfg, head));
    sgd.Step();
  }
  return 0.5 * (MeanMaxProbability(SoftmaxRows(a)) + MeanMaxProbability(SoftmaxRows(b)));
}

double FreeFeatureMaxProb(std::size_t n, std::size_t dim, std::size_t classes,
                          std::size_t steps, double lr, std::uint64_t seed) {
  Rng rng(seed);
  const Tensor a = RandomTensor(rng, n, dim, 1.0, true);
  const Tensor b = RandomTensor(rng, n, dim, 1.0, true);
  const Linear classifier = Linear::Init(dim, classes, /*with_bias=*/false, rng);
  Sgd sgd({a, b}, lr);
  const LossConfig cfg = ConfigFor(LossKind::kFcl, true);
  for (std::size_t step = 0; step < steps; ++step) {
    sgd.ZeroGrad();
    Backward(FclLoss({a, b}, cfg));
    sgd.Step();
  }
  return 0.5 * (MeanMaxProbability(SoftmaxRows(classifier.Forward(a.detach()))) +
                MeanMaxProbability(SoftmaxRows(classifier.Forward(b.detach()))));
}

Verdict OneHotEmergence() {
  const auto start = Clock::now();
  double lowest = INFINITY, small_batch = INFINITY, fcl_highest = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    lowest = std::min(lowest, FreeLogitMaxProb(LossKind::kPcl, 8, 4, 2000, 0.1, seed));
    small_batch =
        std::min(small_batch, FreeLogitMaxProb(LossKind::kPcl, 4, 4, 2000, 0.1, seed));
    fcl_highest =
        std::max(fcl_highest, FreeFeatureMaxProb(8, 16, 4, 2000, 0.1, seed));
  }
  return Finish(7, "one-hot emergence", lowest > 0.99 && fcl_highest < 0.9,
                "PCL N=8 C=4 min mean max-prob over 5 seeds " + Fmt(lowest) +
                    " (N=4: " + Fmt(small_batch) +
                    "); FCL free features with attached softmax max " +
                    Fmt(fcl_highest),
                start);
}

ExperimentSpec BenchmarkSpec() {
  ExperimentSpec spec;
  spec.name = "benchmark";
  spec.grid = {{kBaselineLabel, std::nullopt, Json::object()},
               {"FCL", LossKind::kFcl, Json::object()},
               {"PCL", LossKind::kPcl, Json::object()}};
  spec.seeds = {0, 1, 2, 3, 4};
  return spec;
}

BenchmarkResult RunBenchmark(const ExperimentSpec& spec, std::ostream* log) {
  const auto start = Clock::now();
  BenchmarkResult result;
  for (const auto& entry : spec.grid) {
    for (std::uint64_t seed : spec.seeds) {
      const TrainConfig cfg = spec.CellConfig(entry, seed);
      const RunRecord record = Train(cfg, MakeProblem(spec.dataset, seed));
      if (record.diverged) {
        throw Error("benchmark cell " + entry.label + "/" + std::to_string(seed) +
                    " diverged: " + record.failure);
      }
      result.cells[entry.label].push_back(record.final);
      if (log) {
        *log << "  " << entry.label << " seed " << seed << ": acc "
             << record.final.eval.target_accuracy << ", oracle "
             << record.final.oracle_accuracy << ", deviation "
             << record.final.eval.deviation << std::endl;
      }
    }
  }
  result.seconds = SecondsSince(start);
  return result;
}

Verdict EndToEndOrdering(std::ostream* log) {
  const auto start = Clock::now();
  BenchmarkResult bench;
  try {
    bench = RunBenchmark(BenchmarkSpec(), log);
  } catch (const std::exception& e) {
    return Finish(8, "end-to-end ordering", false, e.what(), start);
  }
  auto mean_acc = [&](const std::string& label) {
    double s = 0.0;
    for (const auto& d : bench.cells[label]) s += d.eval.target_accuracy;
    return 100.0 * s / static_cast<double>(bench.cells[label].size());
  };
  const double base = mean_acc(kBaselineLabel), fcl = mean_acc("FCL"),
               pcl = mean_acc("PCL");
  int deviation_wins = 0, gap_wins = 0;
  const auto& f = bench.cells["FCL"];
  const auto& p = bench.cells["PCL"];
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (p[i].eval.deviation < f[i].eval.deviation) ++deviation_wins;
    if (p[i].oracle_gap < f[i].oracle_gap) ++gap_wins;
  }
  const bool ok = pcl >= fcl + 3.0 && fcl >= base - 1.0 && deviation_wins >= 4 &&
                  gap_wins >= 4 && bench.seconds < 300.0;
  return Finish(8, "end-to-end ordering", ok,
                "mean acc Baseline " + Fmt(base) + " FCL " + Fmt(fcl) + " PCL " +
                    Fmt(pcl) + "; deviation PCL<FCL " + std::to_string(deviation_wins) +
                    "/5; gap PCL<FCL " + std::to_string(gap_wins) + "/5; " +
                    Fmt(bench.seconds) + " s",
                start);
}

namespace {

std::string CompareRecords(const RunRecord& x, const RunRecord& y) {
  if (x.steps_completed != y.steps_completed || x.diverged != y.diverged) {
    return "step count";
  }
  if (x.intervals.size() != y.intervals.size()) return "interval count";
  for (std::size_t i = 0; i < x.intervals.size(); ++i) {
    const auto& a = x.intervals[i];
    const auto& b = y.intervals[i];
    if (a.step != b.step || a.loss_total != b.loss_total ||
        a.loss_supervised != b.loss_supervised ||
        a.loss_contrastive != b.loss_contrastive || a.loss_pseudo != b.loss_pseudo ||
        a.loss_regularizer != b.loss_regularizer ||
        a.target_accuracy != b.target_accuracy || a.mean_max_prob != b.mean_max_prob ||
        a.deviation != b.deviation) {
      return "interval " + std::to_string(i);
    }
  }
  if (ToJson(x.final) != ToJson(y.final)) return "final diagnostics";
  const auto xp = x.model.Parameters(), yp = y.model.Parameters();
  for (std::size_t k = 0; k < xp.size(); ++k) {
    if (!std::ranges::equal(xp[k].data(), yp[k].data())) return "parameters";
  }
  if (!std::ranges::equal(x.embeddings.features.data(), y.embeddings.features.data())) {
    return "embeddings";
  }
  if (x.rng_state != y.rng_state) return "rng state";
  return "";
}

}  // namespace

Verdict Reproducibility() {
  const auto start = Clock::now();
  const ExperimentSpec spec = BenchmarkSpec();
  std::vector<TrainConfig> configs = {spec.CellConfig(spec.grid[2], 3)};
  TrainConfig extra = spec.CellConfig({"NTCL", LossKind::kNtcl, Json::object()}, 7);
  extra.steps = 300;
  extra.pseudo_label.enabled = true;
  extra.pseudo_label.confidence = 0.8;
  configs.push_back(extra);

  std::string problem;
  for (const auto& cfg : configs) {
    const SsdaProblem data = MakeProblem(spec.dataset, cfg.seed);
    const RunRecord first = Train(cfg, data);
    const RunRecord second = Train(cfg, MakeProblem(spec.dataset, cfg.seed));
    if (auto diff = CompareRecords(first, second); !diff.empty()) {
      problem = std::string(LossKindName(cfg.loss.kind)) + " rerun differs in " + diff;
      break;
    }
    const Checkpoint restored = CheckpointFromJson(
        Json::parse(CheckpointToJson({first.model, first.rng_state, ToJson(cfg)}).dump()));
    if (ToJson(Diagnose(restored.model, data, cfg)) != ToJson(first.final)) {
      problem = std::string(LossKindName(cfg.loss.kind)) +
                " checkpoint round-trip changed metrics";
      break;
    }
    if (restored.rng_state != first.rng_state) {
      problem = "checkpoint round-trip changed rng state";
      break;
    }
  }
  return Finish(9, "reproducibility", problem.empty(),
                problem.empty() ? "2 configs rerun bit-identically; checkpoint "
                                  "round-trip preserves final metrics"
                                : problem,
                start);
}

std::vector<Criterion> AllCriteria(std::ostream* log) {
  return {{1, GradientSuite},
          {2, OracleSuite},
          {3, BoundSuite},
          {4, ClosedForms},
          {5, InvarianceSuite},
          {6, ClassWeightGradients},
          {7, OneHotEmergence},
          {8, [log] { return EndToEndOrdering(log); }},
          {9, Reproducibility}};
}

}  // namespace pcllab::acceptance
