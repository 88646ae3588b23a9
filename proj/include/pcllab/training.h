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

// Semi-supervised domain adaptation training loop.
//
// Objective per step:
//   CE(source batch + few-shot target) + lambda * contrastive(two target views)
//   [+ pseudo-label CE + lambda_reg * uniformity regularizer]
//
// Evaluation is transductive: metrics are measured on the same target pool
// the contrastive term trains on.

#ifndef PCLLAB_TRAINING_H_
#define PCLLAB_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pcllab/losses.h"
#include "pcllab/model.h"
#include "pcllab/supervised.h"
#include "pcllab/synthdata.h"

namespace pcllab {

struct PseudoLabelConfig {
  bool enabled = false;
  double confidence = 0.95;
  double lambda_reg = 0.1;
};

struct TrainConfig {
  LossConfig loss;
  ModelConfig model;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t steps = 1500;
  std::size_t batch_source = 32;
  std::size_t batch_target = 32;
  double lambda_contrastive = 1.0;
  PseudoLabelConfig pseudo_label;
  double augment_strength = 0.25;
  std::size_t eval_interval = 50;
  // Whether few-shot labeled target points may also be drawn into the
  // contrastive batch. They are target-domain data, so yes by default.
  bool few_shot_in_contrastive = true;
  ProbeOptions probe;
  std::uint64_t seed = 0;

  void Validate() const;
};

// A full semi-supervised problem. Only `few_shot` exposes target labels to
// the training objective; `target.labels()` is read by evaluation only.
struct SsdaProblem {
  DomainDataset source;
  DomainDataset target;
  FewShotSplit few_shot;
};

struct DatasetSpec {
  std::size_t classes = 4;
  std::size_t n_per_class = 50;
  std::size_t shots = 3;
  double radius = kDefaultClusterRadius;
  ShiftSpec shift = DefaultBenchmarkShift();

  void Validate() const;
};

SsdaProblem MakeProblem(const DatasetSpec& spec, std::uint64_t seed);

struct MetricsRow {
  std::size_t step = 0;
  double loss_total = 0.0;
  double loss_supervised = 0.0;
  double loss_contrastive = 0.0;
  double loss_pseudo = 0.0;
  double loss_regularizer = 0.0;
  double target_accuracy = 0.0;
  double mean_max_prob = 0.0;
  double deviation = 0.0;
};

struct EvalMetrics {
  double target_accuracy = 0.0;
  double mean_max_prob = 0.0;
  double deviation = 0.0;
};

struct FinalDiagnostics {
  EvalMetrics eval;
  double oracle_accuracy = 0.0;
  // oracle_accuracy - eval.target_accuracy.
  double oracle_gap = 0.0;
};

struct EmbeddingExport {
  // Rows: every target point, then every source point.
  Tensor features;
  std::vector<std::size_t> labels;
  std::vector<Domain> domains;
  Tensor class_weights;
};

struct RunRecord {
  std::vector<MetricsRow> intervals;
  std::size_t steps_completed = 0;
  bool diverged = false;
  std::string failure;
  FinalDiagnostics final;
  EmbeddingExport embeddings;
  Model model;
  // Serialized state of the sampling engine after the last step.
  std::string rng_state;
};

// Mean over non-empty classes c of 1 - cos(mu_c, w_c), mu_c the centroid of
// the features of points labeled c. Throws ContractError if no class has
// points.
double DeviationScore(const Model& model, const Tensor& points,
                      std::span<const std::size_t> labels);
double DeviationScore(const Tensor& features, const Tensor& class_weights,
                      std::span<const std::size_t> labels);

EvalMetrics Evaluate(const Model& model, const DomainDataset& target);

// Evaluation plus the frozen-encoder probe, seeded from cfg.seed. Train
// calls this at the end of a run; it can be replayed on a restored model.
FinalDiagnostics Diagnose(const Model& model, const SsdaProblem& problem,
                          const TrainConfig& cfg);

// Runs the configured loop. A non-finite loss or parameter stops the run;
// the record then has diverged = true and holds the metrics gathered so far.
RunRecord Train(const TrainConfig& cfg, const SsdaProblem& problem);

// Columns: step,loss_total,loss_supervised,loss_contrastive,loss_pseudo,
// loss_regularizer,target_accuracy,mean_max_prob,deviation.
void WriteMetricsCsv(const RunRecord& record, std::ostream& os);
// Columns: domain,label,f0..f{d-1}.
void WriteEmbeddingsCsv(const EmbeddingExport& e, std::ostream& os);
// Columns: class,w0..w{d-1}.
void WriteClassWeightsCsv(const EmbeddingExport& e, std::ostream& os);

// SplitMix64 step; derives independent stream seeds from one run seed.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pcllab

#endif  // PCLLAB_TRAINING_H_
