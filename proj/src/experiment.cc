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

#include "pcllab/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "pcllab/errors.h"

namespace pcllab {

namespace fs = std::filesystem;

namespace {

bool SafeName(const std::string& name) {
  if (name.empty() || name == "." || name == "..") return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.';
  });
}

std::string KindName(const GridEntry& entry) {
  return entry.kind ? std::string(LossKindName(*entry.kind)) : "none";
}

fs::path CellDir(const ExperimentSpec& spec, const std::string& label,
                 std::uint64_t seed) {
  return spec.ExperimentDir() / label / std::to_string(seed);
}

CellStatus ParseStatus(const std::string& s) {
  if (s == "ok") return CellStatus::kOk;
  if (s == "diverged") return CellStatus::kDiverged;
  return CellStatus::kError;
}

FinalDiagnostics DiagnosticsFromJson(const Json& j) {
  FinalDiagnostics d;
  d.eval.target_accuracy = j.value("target_accuracy", 0.0);
  d.eval.mean_max_prob = j.value("mean_max_prob", 0.0);
  d.eval.deviation = j.value("deviation", 0.0);
  d.oracle_accuracy = j.value("oracle_accuracy", 0.0);
  d.oracle_gap = j.value("oracle_gap", 0.0);
  return d;
}

// Completed cells have a final.json with status ok or diverged.
std::optional<ComparisonRow> LoadCompletedCell(const fs::path& dir) {
  const fs::path final_path = dir / "final.json";
  if (!fs::exists(final_path)) return std::nullopt;
  Json j;
  try {
    j = ReadJsonFile(final_path);
  } catch (const Error&) {
    return std::nullopt;
  }
  ComparisonRow row;
  row.status = ParseStatus(j.value("status", std::string("error")));
  if (row.status == CellStatus::kError) return std::nullopt;
  row.label = j.value("label", std::string());
  row.kind = j.value("kind", std::string());
  row.seed = j.value("seed", std::uint64_t{0});
  row.message = j.value("message", std::string());
  row.diagnostics = DiagnosticsFromJson(j);
  return row;
}

template <typename Writer>
void WriteWith(const fs::path& path, Writer writer) {
  std::ostringstream os;
  writer(os);
  WriteTextFile(path, os.str());
}

Json FinalJson(const ComparisonRow& row, std::size_t steps_completed) {
  Json j = ToJson(row.diagnostics);
  j["status"] = std::string(CellStatusName(row.status));
  j["message"] = row.message;
  j["label"] = row.label;
  j["kind"] = row.kind;
  j["seed"] = row.seed;
  j["steps_completed"] = steps_completed;
  return j;
}

struct CellOutcome {
  ComparisonRow row;
  bool trained = false;
  std::size_t steps = 0;
};

CellOutcome RunCell(const ExperimentSpec& spec, const GridEntry& entry,
                    std::uint64_t seed, bool force) {
  const fs::path dir = CellDir(spec, entry.label, seed);
  if (!force) {
    if (auto cached = LoadCompletedCell(dir)) return {*cached, false, 0};
  }
  CellOutcome out;
  out.row.label = entry.label;
  out.row.kind = KindName(entry);
  out.row.seed = seed;
  out.trained = true;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  fs::remove(dir / "final.json", ec);

  try {
    const TrainConfig cfg = spec.CellConfig(entry, seed);
    Json echo = {{"label", entry.label},
                 {"kind", out.row.kind},
                 {"seed", seed},
                 {"dataset", ToJson(spec.dataset)},
                 {"train", ToJson(cfg)}};
    WriteTextFile(dir / "config.json", echo.dump(2) + "\n");

    const SsdaProblem problem = MakeProblem(spec.dataset, seed);
    const RunRecord record = Train(cfg, problem);
    out.steps = record.steps_completed;

    WriteWith(dir / "metrics.csv",
              [&](std::ostream& os) { WriteMetricsCsv(record, os); });
    if (record.diverged) {
      out.row.status = CellStatus::kDiverged;
      out.row.message = record.failure;
    } else {
      out.row.diagnostics = record.final;
      WriteWith(dir / "embeddings.csv",
                [&](std::ostream& os) { WriteEmbeddingsCsv(record.embeddings, os); });
      WriteWith(dir / "class_weights.csv", [&](std::ostream& os) {
        WriteClassWeightsCsv(record.embeddings, os);
      });
      SaveCheckpoint({record.model, record.rng_state, echo}, dir / "checkpoint.json");
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    out.row.status = CellStatus::kError;
    out.row.message = e.what();
  }
  WriteTextFile(dir / "final.json", FinalJson(out.row, out.steps).dump(2) + "\n");
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Minimal CSV reader for files this module writes (no quoting).
std::vector<std::vector<std::string>> ReadCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string_view CellStatusName(CellStatus status) {
  switch (status) {
    case CellStatus::kOk:
      return "ok";
    case CellStatus::kDiverged:
      return "diverged";
    case CellStatus::kError:
      return "error";
  }
  return "error";
}

void ExperimentSpec::Validate() const {
  if (!SafeName(name)) {
    throw ConfigError("experiment name '" + name + "' is not filesystem-safe");
  }
  if (grid.empty()) throw ConfigError("experiment grid is empty");
  if (seeds.empty()) throw ConfigError("experiment seed list is empty");
  std::set<std::string> labels;
  for (const auto& entry : grid) {
    if (!SafeName(entry.label)) {
      throw ConfigError("grid label '" + entry.label + "' is not filesystem-safe");
    }
    if (!labels.insert(entry.label).second) {
      throw ConfigError("duplicate grid label '" + entry.label + "'");
    }
  }
  std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) {
    throw ConfigError("duplicate seeds in experiment");
  }
  dataset.Validate();
  train.Validate();
}

TrainConfig ExperimentSpec::CellConfig(const GridEntry& entry,
                                       std::uint64_t seed) const {
  Json merged = pcllab::ToJson(train);
  merged.merge_patch(entry.overrides);
  TrainConfig cfg = TrainConfigFromJson(merged, train);
  if (entry.kind) {
    cfg.loss.kind = *entry.kind;
  } else {
    cfg.lambda_contrastive = 0.0;
  }
  cfg.model.classes = dataset.classes;
  cfg.seed = seed;
  cfg.Validate();
  return cfg;
}

ExperimentSpec ExperimentSpec::FromJson(const Json& j) {
  if (!j.is_object()) throw ConfigError("experiment spec: expected an object");
  for (const auto& item : j.items()) {
    static const std::set<std::string> kKeys = {"name", "dataset", "train",
                                                "grid", "seeds", "output_dir"};
    if (!kKeys.count(item.key())) {
      throw ConfigError("experiment spec: unknown key '" + item.key() + "'");
    }
  }
  ExperimentSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    if (j.contains("dataset")) spec.dataset = DatasetSpecFromJson(j["dataset"]);
    if (j.contains("train")) spec.train = TrainConfigFromJson(j["train"]);
    for (const auto& g : j.at("grid")) {
      for (const auto& item : g.items()) {
        if (item.key() != "kind" && item.key() != "label" && item.key() != "overrides") {
          throw ConfigError("experiment spec: unknown grid key '" + item.key() + "'");
        }
      }
      GridEntry entry;
      const std::string kind = g.at("kind").get<std::string>();
      if (kind != kBaselineLabel) entry.kind = ParseLossKind(kind);
      entry.label = g.value("label", kind);
      if (g.contains("overrides")) entry.overrides = g["overrides"];
      spec.grid.push_back(std::move(entry));
    }
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("output_dir")) {
      spec.output_dir = j["output_dir"].get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment spec: ") + e.what());
  }
  spec.Validate();
  return spec;
}

Json ExperimentSpec::ToJson() const {
  Json grid_json = Json::array();
  for (const auto& entry : grid) {
    grid_json.push_back(
        {{"kind", entry.kind ? std::string(LossKindName(*entry.kind))
                             : std::string(kBaselineLabel)},
         {"label", entry.label},
         {"overrides", entry.overrides}});
  }
  return {{"name", name},
          {"dataset", pcllab::ToJson(dataset)},
          {"train", pcllab::ToJson(train)},
          {"grid", std::move(grid_json)},
          {"seeds", seeds},
          {"output_dir", output_dir.string()}};
}

ExperimentSpec LoadExperimentSpec(const fs::path& path) {
  return ExperimentSpec::FromJson(ReadJsonFile(path));
}

std::vector<AggregateRow> ComparisonTable::Aggregates() const {
  std::vector<std::string> order;
  for (const auto& row : rows) {
    if (std::find(order.begin(), order.end(), row.label) == order.end()) {
      order.push_back(row.label);
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& label : order) {
    std::vector<double> acc, oracle, gap, dev, mmp;
    for (const auto& row : rows) {
      if (row.label != label || row.status != CellStatus::kOk) continue;
      acc.push_back(row.diagnostics.eval.target_accuracy);
      oracle.push_back(row.diagnostics.oracle_accuracy);
      gap.push_back(row.diagnostics.oracle_gap);
      dev.push_back(row.diagnostics.eval.deviation);
      mmp.push_back(row.diagnostics.eval.mean_max_prob);
    }
    AggregateRow a;
    a.label = label;
    a.runs = acc.size();
    a.accuracy_mean = Mean(acc);
    a.accuracy_std = SampleStd(acc);
    a.oracle_mean = Mean(oracle);
    a.oracle_std = SampleStd(oracle);
    a.gap_mean = Mean(gap);
    a.gap_std = SampleStd(gap);
    a.deviation_mean = Mean(dev);
    a.deviation_std = SampleStd(dev);
    a.max_prob_mean = Mean(mmp);
    a.max_prob_std = SampleStd(mmp);
    out.push_back(a);
  }
  return out;
}

const ComparisonRow* ComparisonTable::Find(const std::string& label,
                                           std::uint64_t seed) const {
  for (const auto& row : rows) {
    if (row.label == label && row.seed == seed) return &row;
  }
  return nullptr;
}

void ComparisonTable::WriteCsv(std::ostream& os) const {
  os << "label,kind,seed,status,target_accuracy,oracle_accuracy,oracle_gap,"
        "deviation,mean_max_prob,message\n";
  os.precision(17);
  for (const auto& r : rows) {
    std::string message = r.message;
    std::replace(message.begin(), message.end(), ',', ';');
    std::replace(message.begin(), message.end(), '\n', ' ');
    os << r.label << ',' << r.kind << ',' << r.seed << ','
       << CellStatusName(r.status) << ',' << r.diagnostics.eval.target_accuracy
       << ',' << r.diagnostics.oracle_accuracy << ',' << r.diagnostics.oracle_gap
       << ',' << r.diagnostics.eval.deviation << ','
       << r.diagnostics.eval.mean_max_prob << ',' << message << '\n';
  }
}

void ComparisonTable::WriteAggregateCsv(std::ostream& os) const {
  os << "label,runs,accuracy_mean,accuracy_std,oracle_mean,oracle_std,gap_mean,"
        "gap_std,deviation_mean,deviation_std,max_prob_mean,max_prob_std\n";
  os.precision(17);
  for (const auto& a : Aggregates()) {
    os << a.label << ',' << a.runs << ',' << a.accuracy_mean << ','
       << a.accuracy_std << ',' << a.oracle_mean << ',' << a.oracle_std << ','
       << a.gap_mean << ',' << a.gap_std << ',' << a.deviation_mean << ','
       << a.deviation_std << ',' << a.max_prob_mean << ',' << a.max_prob_std
       << '\n';
  }
}

void ComparisonTable::WriteSummary(std::ostream& os) const {
  os << std::left << std::setw(12) << "label" << std::right << std::setw(6)
     << "runs" << std::setw(18) << "accuracy %" << std::setw(18) << "oracle %"
     << std::setw(16) << "gap %" << std::setw(16) << "deviation"
     << std::setw(16) << "max prob" << '\n';
  auto cell = [&](double mean, double sd, double k, int precision) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << mean * k << " +- " << sd * k;
    return s.str();
  };
  for (const auto& a : Aggregates()) {
    os << std::left << std::setw(12) << a.label << std::right << std::setw(6)
       << a.runs << std::setw(18) << cell(a.accuracy_mean, a.accuracy_std, 100, 1)
       << std::setw(18) << cell(a.oracle_mean, a.oracle_std, 100, 1)
       << std::setw(16) << cell(a.gap_mean, a.gap_std, 100, 1) << std::setw(16)
       << cell(a.deviation_mean, a.deviation_std, 1, 3) << std::setw(16)
       << cell(a.max_prob_mean, a.max_prob_std, 1, 3) << '\n';
  }
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.status != CellStatus::kOk) {
      ++failed;
      os << "cell " << r.label << "/" << r.seed << " " << CellStatusName(r.status)
         << ": " << r.message << '\n';
    }
  }
  if (failed == 0) os << "all " << rows.size() << " cells ok\n";
}

ExperimentResult RunExperiment(const ExperimentSpec& spec,
                               const RunOptions& options) {
  spec.Validate();
  const fs::path root = spec.ExperimentDir();
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  WriteTextFile(root / "spec.json", spec.ToJson().dump(2) + "\n");

  struct Cell {
    const GridEntry* entry;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& entry : spec.grid) {
    for (std::uint64_t seed : spec.seeds) cells.push_back({&entry, seed});
  }
  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr io_failure;

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        outcomes[i] = RunCell(spec, *cells[i].entry, cells[i].seed, options.force);
      } catch (...) {
        std::lock_guard<std::mutex> lock(log_mutex);
        if (!io_failure) io_failure = std::current_exception();
        return;
      }
      if (options.log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        const auto& row = outcomes[i].row;
        *options.log << (outcomes[i].trained ? "trained " : "cached  ")
                     << row.label << "/" << row.seed << " "
                     << CellStatusName(row.status) << " acc="
                     << row.diagnostics.eval.target_accuracy << std::endl;
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, cells.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (io_failure) std::rethrow_exception(io_failure);

  ExperimentResult result;
  for (auto& outcome : outcomes) {
    if (outcome.trained) {
      ++result.cells_trained;
      result.training_steps += outcome.steps;
    } else {
      ++result.cells_cached;
    }
    if (outcome.row.status != CellStatus::kOk) result.all_ok = false;
    result.table.rows.push_back(std::move(outcome.row));
  }
  WriteWith(root / "comparison.csv",
            [&](std::ostream& os) { result.table.WriteCsv(os); });
  WriteWith(root / "aggregate.csv",
            [&](std::ostream& os) { result.table.WriteAggregateCsv(os); });
  WriteWith(root / "summary.txt",
            [&](std::ostream& os) { result.table.WriteSummary(os); });
  return result;
}

FinalDiagnostics EvaluateCell(const fs::path& cell_dir) {
  const Json config = ReadJsonFile(cell_dir / "config.json");
  const Checkpoint checkpoint = LoadCheckpoint(cell_dir / "checkpoint.json");
  const DatasetSpec dataset = DatasetSpecFromJson(config.at("dataset"));
  const TrainConfig cfg = TrainConfigFromJson(config.at("train"));
  const SsdaProblem problem = MakeProblem(dataset, cfg.seed);
  return Diagnose(checkpoint.model, problem, cfg);
}

PlotExport EmitPlotData(const fs::path& experiment_dir) {
  PlotExport result;
  const fs::path plots = experiment_dir / "plots";
  std::error_code ec;
  fs::create_directories(plots, ec);
  if (ec) throw IoError("cannot create " + plots.string() + ": " + ec.message());

  struct Done {
    std::string label;
    std::uint64_t seed;
    ComparisonRow row;
    fs::path dir;
  };
  std::vector<Done> done;
  if (fs::exists(experiment_dir / "spec.json")) {
    const Json spec = ReadJsonFile(experiment_dir / "spec.json");
    for (const auto& g : spec.at("grid")) {
      const std::string label = g.at("label").get<std::string>();
      for (std::uint64_t seed : spec.at("seeds").get<std::vector<std::uint64_t>>()) {
        const fs::path dir = experiment_dir / label / std::to_string(seed);
        auto row = LoadCompletedCell(dir);
        if (row && row->status == CellStatus::kOk &&
            fs::exists(dir / "embeddings.csv") &&
            fs::exists(dir / "class_weights.csv")) {
          done.push_back({label, seed, *row, dir});
        } else {
          result.missing.push_back(label + "/" + std::to_string(seed));
        }
      }
    }
  }

  std::ostringstream bars;
  bars.precision(17);
  bars << "label,seed,actual_accuracy,oracle_accuracy\n";
  for (const auto& d : done) {
    bars << d.label << ',' << d.seed << ',' << d.row.diagnostics.eval.target_accuracy
         << ',' << d.row.diagnostics.oracle_accuracy << '\n';
    ++result.bar_rows;
  }
  WriteTextFile(plots / "accuracy_bars.csv", bars.str());

  // Width is the widest vector among finished cells.
  std::vector<std::vector<std::vector<std::string>>> features, weights;
  std::size_t width = 0;
  for (const auto& d : done) {
    features.push_back(ReadCsv(d.dir / "embeddings.csv"));
    weights.push_back(ReadCsv(d.dir / "class_weights.csv"));
    if (!features.back().empty()) width = std::max(width, features.back()[0].size() - 2);
    if (!weights.back().empty()) width = std::max(width, weights.back()[0].size() - 1);
  }
  std::ostringstream emb;
  emb << "label,seed,role,domain,class";
  for (std::size_t k = 0; k < width; ++k) emb << ",v" << k;
  emb << '\n';
  auto pad = [&](std::size_t have) {
    for (std::size_t k = have; k < width; ++k) emb << ',';
  };
  for (std::size_t c = 0; c < done.size(); ++c) {
    const auto& f = features[c];
    for (std::size_t r = 1; r < f.size(); ++r) {
      emb << done[c].label << ',' << done[c].seed << ",feature," << f[r][0] << ','
          << f[r][1];
      for (std::size_t k = 2; k < f[r].size(); ++k) emb << ',' << f[r][k];
      pad(f[r].size() - 2);
      emb << '\n';
      ++result.embedding_rows;
    }
    const auto& w = weights[c];
    for (std::size_t r = 1; r < w.size(); ++r) {
      emb << done[c].label << ',' << done[c].seed << ",class_weight,," << w[r][0];
      for (std::size_t k = 1; k < w[r].size(); ++k) emb << ',' << w[r][k];
      pad(w[r].size() - 1);
      emb << '\n';
      ++result.embedding_rows;
    }
  }
  WriteTextFile(plots / "embeddings.csv", emb.str());
  return result;
}

}  // namespace pcllab
