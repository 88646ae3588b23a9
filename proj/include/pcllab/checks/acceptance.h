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


// Acceptance criteria as callable checks. Each returns one verdict with a
// short measured detail; the acceptance binary prints them as PASS/FAIL.

#ifndef PCLLAB_CHECKS_ACCEPTANCE_H_
#define PCLLAB_CHECKS_ACCEPTANCE_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pcllab/experiment.h"

namespace pcllab::acceptance {

struct Verdict {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

Verdict GradientSuite();
Verdict OracleSuite();
Verdict BoundSuite();
Verdict ClosedForms();
Verdict InvarianceSuite();
Verdict ClassWeightGradients();
Verdict OneHotEmergence();
Verdict EndToEndOrdering(std::ostream* log = nullptr);
Verdict Reproducibility();

// Free logits for two views trained under `kind` with plain SGD. Returns the
// final mean max-probability over both views.
double FreeLogitMaxProb(LossKind kind, std::size_t n, std::size_t classes,
                        std::size_t steps, double lr, std::uint64_t seed);
// Free features trained under FCL, then read through a fixed random bias-free
// classifier. Returns the mean max-probability of that softmax.
double FreeFeatureMaxProb(std::size_t n, std::size_t dim, std::size_t classes,
                          std::size_t steps, double lr, std::uint64_t seed);

// Grid used by the end-to-end ordering check: Baseline, FCL and PCL on the
// default benchmark, seeds 0..4.
ExperimentSpec BenchmarkSpec();

struct BenchmarkResult {
  // label -> per-seed diagnostics, in seed order.
  std::map<std::string, std::vector<FinalDiagnostics>> cells;
  double seconds = 0.0;
};

// Trains every cell of `spec` in memory.
BenchmarkResult RunBenchmark(const ExperimentSpec& spec, std::ostream* log = nullptr);

struct Criterion {
  int id;
  std::function<Verdict()> run;
};

// All criteria in order. `log` receives end-to-end progress.
std::vector<Criterion> AllCriteria(std::ostream* log = nullptr);

}  // namespace pcllab::acceptance

#endif  // PCLLAB_CHECKS_ACCEPTANCE_H_
