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

// Multi-seed, multi-variant experiment grids.
//
// On-disk layout under <output_dir>/<name>/:
//   spec.json                 echo of the experiment spec
//   comparison.csv            one row per (label, seed)
//   aggregate.csv             mean/std per label
//   summary.txt               human-readable table
//   <label>/<seed>/config.json, metrics.csv, final.json, embeddings.csv,
//                  class_weights.csv, checkpoint.json
//   plots/accuracy_bars.csv, plots/embeddings.csv   (written by export)

#ifndef PCLLAB_EXPERIMENT_H_
#define PCLLAB_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcllab/serialization.h"
#include "pcllab/training.h"

namespace pcllab {

// Label used for the supervised-only grid entry (contrastive weight 0).
inline constexpr const char* kBaselineLabel = "Baseline";

struct GridEntry {
  std::string label;
  // nullopt for the baseline.
  std::optional<LossKind> kind;
  // Merge-patch applied to the base train config for this entry.
  Json overrides = Json::object();
};

struct ExperimentSpec {
  std::string name;
  DatasetSpec dataset;
  TrainConfig train;
  std::vector<GridEntry> grid;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "runs";

  // Throws ConfigError on an empty grid or seed list, duplicate labels, or a
  // name that is not filesystem-safe ([A-Za-z0-9._-]+, not "." or "..").
  void Validate() const;

  // Resolved config for one cell.
  TrainConfig CellConfig(const GridEntry& entry, std::uint64_t seed) const;

  static ExperimentSpec FromJson(const Json& j);
  Json ToJson() const;

  std::filesystem::path ExperimentDir() const { return output_dir / name; }
};

ExperimentSpec LoadExperimentSpec(const std::filesystem::path& path);

enum class CellStatus { kOk, kDiverged, kError };
std::string_view CellStatusName(CellStatus status);

struct ComparisonRow {
  std::string label;
  std::string kind;  // loss kind name, or "none" for the baseline
  std::uint64_t seed = 0;
  CellStatus status = CellStatus::kOk;
  std::string message;
  FinalDiagnostics diagnostics;
};

struct AggregateRow {
  std::string label;
  std::size_t runs = 0;
  double accuracy_mean = 0, accuracy_std = 0;
  double oracle_mean = 0, oracle_std = 0;
  double gap_mean = 0, gap_std = 0;
  double deviation_mean = 0, deviation_std = 0;
  double max_prob_mean = 0, max_prob_std = 0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  // Recomputed from `rows` over successful cells, in grid order of first
  // appearance. Sample standard deviation (n - 1); 0 for a single run.
  std::vector<AggregateRow> Aggregates() const;
  const ComparisonRow* Find(const std::string& label, std::uint64_t seed) const;

  // label,kind,seed,status,target_accuracy,oracle_accuracy,oracle_gap,
  // deviation,mean_max_prob,message
  void WriteCsv(std::ostream& os) const;
  // label,runs,accuracy_mean,accuracy_std,oracle_mean,oracle_std,gap_mean,
  // gap_std,deviation_mean,deviation_std,max_prob_mean,max_prob_std
  void WriteAggregateCsv(std::ostream& os) const;
  void WriteSummary(std::ostream& os) const;
};

struct RunOptions {
  bool force = false;
  std::size_t jobs = 1;
  // Progress lines; may be null.
  std::ostream* log = nullptr;
};

struct ExperimentResult {
  ComparisonTable table;
  std::size_t cells_trained = 0;
  std::size_t cells_cached = 0;
  std::size_t training_steps = 0;
  bool all_ok = true;
};

// Trains every (grid entry, seed) cell not already completed on disk (all of
// them with force) and writes per-cell and aggregate outputs. A failing cell
// is recorded in its row and does not stop the others. Throws IoError when
// the output directory cannot be created or written.
ExperimentResult RunExperiment(const ExperimentSpec& spec,
                               const RunOptions& options = {});

// Rebuilds a cell's model from checkpoint.json and recomputes its final
// diagnostics from config.json.
FinalDiagnostics EvaluateCell(const std::filesystem::path& cell_dir);

struct PlotExport {
  std::size_t bar_rows = 0;
  std::size_t embedding_rows = 0;
  // Cells that the spec lists but that have no completed outputs.
  std::vector<std::string> missing;
};

// Writes plots/accuracy_bars.csv
//   label,seed,actual_accuracy,oracle_accuracy
// and plots/embeddings.csv
//   label,seed,role,domain,class,v0..v{D-1}
// where role is "feature" or "class_weight" (domain empty for weights).
// Without a spec.json, or with no finished cells, both files hold headers only.
PlotExport EmitPlotData(const std::filesystem::path& experiment_dir);

}  // namespace pcllab

#endif  // PCLLAB_EXPERIMENT_H_
