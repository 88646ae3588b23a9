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


// pcl-lab: experiment runner and acceptance checker.
//
//   pcl-lab run <spec.json> [--force] [--jobs N]
//   pcl-lab check [--only 1,3,8]
//   pcl-lab export <experiment_dir>
//   pcl-lab eval <cell_dir>
//
// Exit status: 0 success, 1 a cell or criterion failed, 2 bad input or I/O.

#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcllab/checks/acceptance.h"
#include "pcllab/errors.h"
#include "pcllab/experiment.h"

namespace {

using namespace pcllab;

int Run(const std::string& spec_path, bool force, std::size_t jobs,
        const std::string& output_dir) {
  ExperimentSpec spec = LoadExperimentSpec(spec_path);
  if (!output_dir.empty()) spec.output_dir = output_dir;
  RunOptions options;
  options.force = force;
  options.jobs = jobs;
  options.log = &std::cerr;
  const ExperimentResult result = RunExperiment(spec, options);
  result.table.WriteSummary(std::cout);
  std::cout << "trained " << result.cells_trained << " cells ("
            << result.training_steps << " steps), reused " << result.cells_cached
            << "; outputs in " << spec.ExperimentDir().string() << "\n";
  return result.all_ok ? 0 : 1;
}

int Check(const std::vector<int>& only, bool verbose) {
  const std::set<int> wanted(only.begin(), only.end());
  bool all = true;
  for (const auto& criterion : acceptance::AllCriteria(verbose ? &std::cerr : nullptr)) {
    if (!wanted.empty() && !wanted.count(criterion.id)) continue;
    const acceptance::Verdict v = criterion.run();
    all = all && v.passed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.passed ? "PASS" : "FAIL", v.id,
                v.name.c_str(), v.detail.c_str(), v.seconds);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}

int Export(const std::string& dir) {
  const PlotExport out = EmitPlotData(dir);
  for (const auto& cell : out.missing) {
    std::cerr << "warning: no completed outputs for " << cell << "\n";
  }
  std::cout << "wrote " << out.bar_rows << " bar rows and " << out.embedding_rows
            << " embedding rows to " << dir << "/plots\n";
  return 0;
}

int Eval(const std::string& cell_dir) {
  const FinalDiagnostics d = EvaluateCell(cell_dir);
  std::cout << ToJson(d).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcl-lab: contrastive loss experiments on a synthetic shift benchmark"};
  app.require_subcommand(1);

  std::string spec_path, output_dir, export_dir, cell_dir;
  bool force = false, verbose = false;
  std::size_t jobs = 1;
  std::vector<int> only;

  auto* run = app.add_subcommand("run", "Train every cell of an experiment grid");
  run->add_option("spec", spec_path, "Experiment spec JSON")->required()->check(
      CLI::ExistingFile);
  run->add_flag("--force", force, "Retrain cells that already finished");
  run->add_option("--jobs,-j", jobs, "Cells trained in parallel")
      ->check(CLI::PositiveNumber);
  run->add_option("--output-dir", output_dir, "Override the spec's output_dir");

  auto* check = app.add_subcommand("check", "Run the acceptance criteria");
  check->add_option("--only", only, "Criterion ids to run")->delimiter(',');
  check->add_flag("--verbose,-v", verbose, "Log end-to-end progress to stderr");

  auto* exp = app.add_subcommand("export", "Write plot-ready CSVs for an experiment");
  exp->add_option("dir", export_dir, "Experiment directory")->required();

  auto* eval = app.add_subcommand("eval", "Recompute final metrics from a checkpoint");
  eval->add_option("cell_dir", cell_dir, "Cell directory")->required()->check(
      CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return Run(spec_path, force, jobs, output_dir);
    if (check->parsed()) return Check(only, verbose);
    if (exp->parsed()) return Export(export_dir);
    if (eval->parsed()) return Eval(cell_dir);
  } catch (const pcllab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
