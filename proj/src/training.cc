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

#include "pcllab/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pcllab/autodiff.h"
#include "pcllab/errors.h"

namespace pcllab {

namespace {

// Seed streams. Separate streams keep model init independent of whether a
// projection head exists, and data sampling independent of both.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kHeadStream = 2;
constexpr std::uint64_t kSamplingStream = 3;
constexpr std::uint64_t kProbeStream = 4;
constexpr std::uint64_t kDataStream = 5;
constexpr std::uint64_t kFewShotStream = 6;

Tensor Rows(const Tensor& points, std::span<const std::size_t> index) {
  return GatherRows(points, index).detach();
}

// First k entries of a fresh shuffle of `pool`.
std::vector<std::size_t> SampleWithoutReplacement(
    std::vector<std::size_t>& pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k)};
}

bool Finite(double v) { return std::isfinite(v); }

}  // namespace

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void TrainConfig::Validate() const {
  loss.Validate();
  model.Validate();
  if (steps < 1) throw ConfigError("TrainConfig: steps must be >= 1");
  if (batch_source < 1 || batch_target < 1) {
    throw ConfigError("TrainConfig: batch sizes must be >= 1");
  }
  if (!(lambda_contrastive >= 0.0)) {
    throw ConfigError("TrainConfig: lambda_contrastive must be >= 0");
  }
  if (!(pseudo_label.confidence > 0.0 && pseudo_label.confidence <= 1.0)) {
    throw ConfigError("TrainConfig: pseudo-label confidence must lie in (0, 1]");
  }
  if (!(lr > 0.0)) throw ConfigError("TrainConfig: lr must be positive");
  if (eval_interval < 1) throw ConfigError("TrainConfig: eval_interval >= 1");
  if (!(augment_strength >= 0.0)) {
    throw ConfigError("TrainConfig: augment_strength must be >= 0");
  }
}

void DatasetSpec::Validate() const {
  if (classes < 2) throw ConfigError("DatasetSpec: classes must be >= 2");
  if (n_per_class < 1) throw ConfigError("DatasetSpec: n_per_class >= 1");
  if (shots > n_per_class) {
    throw ConfigError("DatasetSpec: shots exceed points per class");
  }
  shift.Validate();
}

SsdaProblem MakeProblem(const DatasetSpec& spec, std::uint64_t seed) {
  spec.Validate();
  auto [source, target] =
      MakeDomainPair(spec.classes, spec.n_per_class, spec.shift,
                     MixSeed(seed, kDataStream), spec.radius);
  FewShotSplit split =
      MakeFewShotSplit(target, spec.shots, MixSeed(seed, kFewShotStream));
  return {std::move(source), std::move(target), std::move(split)};
}

double DeviationScore(const Tensor& features, const Tensor& class_weights,
                      std::span<const std::size_t> labels) {
  const std::size_t d = features.cols();
  const std::size_t classes = class_weights.rows();
  if (class_weights.cols() != d) {
    throw DimensionError("DeviationScore: feature and weight widths differ");
  }
  if (labels.size() != features.rows()) {
    throw DimensionError("DeviationScore: one label per row required");
  }
  std::vector<double> centroid(classes * d, 0.0);
  std::vector<std::size_t> count(classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) throw ContractError("DeviationScore: bad label");
    ++count[labels[i]];
    for (std::size_t k = 0; k < d; ++k) {
      centroid[labels[i] * d + k] += features.at(i, k);
    }
  }
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (count[c] == 0) continue;
    double dot = 0.0, mu2 = 0.0, w2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double mu = centroid[c * d + k] / static_cast<double>(count[c]);
      const double w = class_weights.at(c, k);
      dot += mu * w;
      mu2 += mu * mu;
      w2 += w * w;
    }
    const double denom = std::sqrt(mu2) * std::sqrt(w2);
    // A zero centroid or weight has no direction; count it as orthogonal.
    total += denom > 0.0 ? 1.0 - dot / denom : 1.0;
    ++used;
  }
  if (used == 0) throw ContractError("DeviationScore: every class is empty");
  return total / static_cast<double>(used);
}

double DeviationScore(const Model& model, const Tensor& points,
                      std::span<const std::size_t> labels) {
  return DeviationScore(model.EncodeFeatures(points).detach(),
                        model.class_weights().detach(), labels);
}

EvalMetrics Evaluate(const Model& model, const DomainDataset& target) {
  const ModelOutputs out = model.Forward(target.points().detach());
  EvalMetrics m;
  m.target_accuracy = Accuracy(out.probs, target.labels());
  m.mean_max_prob = MeanMaxProbability(out.probs);
  m.deviation = DeviationScore(out.features.detach(),
                               model.class_weights().detach(), target.labels());
  return m;
}

FinalDiagnostics Diagnose(const Model& model, const SsdaProblem& problem,
                          const TrainConfig& cfg) {
  FinalDiagnostics diag;
  diag.eval = Evaluate(model, problem.target);
  ProbeOptions probe = cfg.probe;
  probe.seed = MixSeed(cfg.seed, kProbeStream);
  diag.oracle_accuracy = FreezeEncoderRetrainClassifier(
      model, problem.target.points().detach(), problem.target.labels(), probe);
  diag.oracle_gap = diag.oracle_accuracy - diag.eval.target_accuracy;
  return diag;
}

RunRecord Train(const TrainConfig& cfg_in, const SsdaProblem& problem) {
  TrainConfig cfg = cfg_in;
  cfg.model.input_dim = problem.source.points().cols();
  cfg.model.classes = problem.source.classes();
  cfg.Validate();

  Rng init_rng(MixSeed(cfg.seed, kInitStream));
  Rng head_rng(MixSeed(cfg.seed, kHeadStream));
  Rng rng(MixSeed(cfg.seed, kSamplingStream));

  RunRecord record;
  record.model = Model::Init(cfg.model, init_rng);
  Model& model = record.model;
  const ProjectionHead head =
      cfg.loss.kind == LossKind::kNtcl
          ? ProjectionHead::Init(cfg.model.feature_dim, head_rng)
          : ProjectionHead::Identity();

  std::vector<Tensor> params = model.Parameters();
  for (const auto& p : head.Parameters()) params.push_back(p);
  Sgd optimizer(params, cfg.lr, cfg.momentum, cfg.weight_decay);

  const Tensor& source_points = problem.source.points();
  const Tensor& target_points = problem.target.points();
  const auto source_labels = problem.source.labels();

  std::vector<std::size_t> source_pool(problem.source.size());
  std::iota(source_pool.begin(), source_pool.end(), 0);
  std::vector<std::size_t> target_pool;
  for (std::size_t i = 0; i < problem.target.size(); ++i) {
    const bool labeled =
        std::find(problem.few_shot.indices.begin(),
                  problem.few_shot.indices.end(),
                  i) != problem.few_shot.indices.end();
    if (cfg.few_shot_in_contrastive || !labeled) target_pool.push_back(i);
  }
  if (target_pool.empty()) {
    throw ConfigError("Train: no target points available for the contrastive batch");
  }
  const Tensor few_shot_points = Rows(target_points, problem.few_shot.indices);

  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const auto src_idx =
        SampleWithoutReplacement(source_pool, cfg.batch_source, rng);
    const auto tgt_idx =
        SampleWithoutReplacement(target_pool, cfg.batch_target, rng);
    const std::uint64_t view_seed = rng();
    const std::uint64_t strong_seed = rng();

    // A NaN reaching a log surfaces as DomainError; treat it as divergence.
    Tensor supervised, contrastive, total;
    double pseudo_value = 0.0, reg_value = 0.0;
    bool finite_loss = true;
    try {
      // Labeled batch: sampled source rows followed by every few-shot row.
      std::vector<double> lab_data;
      std::vector<std::size_t> lab_labels;
      for (std::size_t i : src_idx) {
        lab_data.push_back(source_points.at(i, 0));
        lab_data.push_back(source_points.at(i, 1));
        lab_labels.push_back(source_labels[i]);
      }
      for (std::size_t k = 0; k < problem.few_shot.indices.size(); ++k) {
        lab_data.push_back(few_shot_points.at(k, 0));
        lab_data.push_back(few_shot_points.at(k, 1));
        lab_labels.push_back(problem.few_shot.labels[k]);
      }
      const Tensor lab_batch({lab_labels.size(), 2}, std::move(lab_data));
      supervised = CrossEntropy(model.Forward(lab_batch).probs, lab_labels);

      const Tensor unlabeled = Rows(target_points, tgt_idx);
      auto [view_a, view_b] =
          AugmentTwoViews(unlabeled, cfg.augment_strength, view_seed);
      const ModelOutputs out_a = model.Forward(view_a);
      const ModelOutputs out_b = model.Forward(view_b);
      contrastive = ComputeLoss(cfg.loss, out_a, out_b, &head);

      total = Add(supervised, Scale(contrastive, cfg.lambda_contrastive));

      if (cfg.pseudo_label.enabled) {
        const Tensor strong =
            StrongAugment(unlabeled, cfg.augment_strength, strong_seed);
        const ModelOutputs out_s = model.Forward(strong);
        PseudoLabelResult pl = PseudoLabelLoss(out_a.probs.detach(), out_s.probs,
                                               cfg.pseudo_label.confidence);
        const Tensor reg = UniformityRegularizer(GatherRows(out_s.probs, pl.rows));
        pseudo_value = pl.loss.item();
        reg_value = reg.item();
        total = Add(total, Add(pl.loss, Scale(reg, cfg.pseudo_label.lambda_reg)));
      }
    } catch (const DomainError&) {
      finite_loss = false;
    }

    if (!finite_loss || !Finite(total.item())) {
      record.diverged = true;
      record.failure = "non-finite loss at step " + std::to_string(step);
      break;
    }
    optimizer.ZeroGrad();
    Backward(total);
    optimizer.Step();
    if (!AllFinite(params)) {
      record.diverged = true;
      record.failure = "non-finite parameters after step " + std::to_string(step);
      break;
    }
    record.steps_completed = step;

    if (step % cfg.eval_interval == 0 || step == cfg.steps) {
      const EvalMetrics eval = Evaluate(model, problem.target);
      MetricsRow row;
      row.step = step;
      row.loss_total = total.item();
      row.loss_supervised = supervised.item();
      row.loss_contrastive = contrastive.item();
      row.loss_pseudo = pseudo_value;
      row.loss_regularizer = reg_value;
      row.target_accuracy = eval.target_accuracy;
      row.mean_max_prob = eval.mean_max_prob;
      row.deviation = eval.deviation;
      record.intervals.push_back(row);
    }
  }

  std::ostringstream rng_state;
  rng_state << rng;
  record.rng_state = rng_state.str();
  if (record.diverged) return record;

  record.final = Diagnose(model, problem, cfg);

  EmbeddingExport& e = record.embeddings;
  const Tensor tf = model.EncodeFeatures(target_points.detach()).detach();
  const Tensor sf = model.EncodeFeatures(source_points.detach()).detach();
  std::vector<double> rows(tf.data().begin(), tf.data().end());
  rows.insert(rows.end(), sf.data().begin(), sf.data().end());
  e.features = Tensor({tf.rows() + sf.rows(), tf.cols()}, std::move(rows));
  e.labels.assign(problem.target.labels().begin(), problem.target.labels().end());
  e.labels.insert(e.labels.end(), source_labels.begin(), source_labels.end());
  e.domains.assign(tf.rows(), Domain::kTarget);
  e.domains.insert(e.domains.end(), sf.rows(), Domain::kSource);
  e.class_weights = model.class_weights().detach();
  return record;
}

void WriteMetricsCsv(const RunRecord& record, std::ostream& os) {
  os << "step,loss_total,loss_supervised,loss_contrastive,loss_pseudo,"
        "loss_regularizer,target_accuracy,mean_max_prob,deviation\n";
  os.precision(17);
  for (const auto& r : record.intervals) {
    os << r.step << ',' << r.loss_total << ',' << r.loss_supervised << ','
       << r.loss_contrastive << ',' << r.loss_pseudo << ','
       << r.loss_regularizer << ',' << r.target_accuracy << ','
       << r.mean_max_prob << ',' << r.deviation << '\n';
  }
}

void WriteEmbeddingsCsv(const EmbeddingExport& e, std::ostream& os) {
  const std::size_t d = e.features.rank() == 2 ? e.features.cols() : 0;
  os << "domain,label";
  for (std::size_t k = 0; k < d; ++k) os << ",f" << k;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < e.labels.size(); ++i) {
    os << DomainName(e.domains[i]) << ',' << e.labels[i];
    for (std::size_t k = 0; k < d; ++k) os << ',' << e.features.at(i, k);
    os << '\n';
  }
}

void WriteClassWeightsCsv(const EmbeddingExport& e, std::ostream& os) {
  const std::size_t d = e.class_weights.rank() == 2 ? e.class_weights.cols() : 0;
  os << "class";
  for (std::size_t k = 0; k < d; ++k) os << ",w" << k;
  os << '\n';
  os.precision(17);
  if (d == 0) return;
  for (std::size_t c = 0; c < e.class_weights.rows(); ++c) {
    os << c;
    for (std::size_t k = 0; k < d; ++k) os << ',' << e.class_weights.at(c, k);
    os << '\n';
  }
}

}  // namespace pcllab
