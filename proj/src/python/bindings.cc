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


// Python module pcllab._core. Arrays cross the boundary as float64 numpy
// arrays; configs cross as JSON text and are parsed by the C++ side.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcllab/autodiff.h"
#include "pcllab/errors.h"
#include "pcllab/experiment.h"
#include "pcllab/losses.h"
#include "pcllab/serialization.h"
#include "pcllab/synthdata.h"
#include "pcllab/training.h"

namespace py = pybind11;

namespace pcllab {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor ToTensor(const Array& a, bool requires_grad = false) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  std::vector<double> data(a.data(), a.data() + r * c);
  return Tensor({r, c}, std::move(data), requires_grad);
}

Array ToArray(const Tensor& t) {
  Array out({t.rows(), t.cols()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Array GradArray(const Tensor& t) {
  Array out({t.rows(), t.cols()});
  const std::vector<double> g = t.has_grad() ? t.grad() : std::vector<double>(t.numel());
  std::copy(g.begin(), g.end(), out.mutable_data());
  return out;
}

// Applies one loss variant to inputs used as given: probability kinds expect
// rows that already sum to 1.
Tensor LossOnInputs(const LossConfig& cfg, const Tensor& a, const Tensor& b,
                    const ProjectionHead& head) {
  const PairedEmbeddings views{a, b};
  switch (cfg.kind) {
    case LossKind::kFcl: return FclLoss(views, cfg);
    case LossKind::kPcl: return PclLoss(views, cfg);
    case LossKind::kLcl: return LclLoss(views, cfg);
    case LossKind::kNtcl: return NtclLoss(views, head, cfg);
    case LossKind::kPclL2: return PclL2Loss(views, cfg);
    case LossKind::kPclMse: return PclMseLoss(views, cfg);
    case LossKind::kBce: return BceLoss(a, b, cfg);
    case LossKind::kSfcl: return SfclLoss(views, cfg);
  }
  throw ConfigError("unknown loss kind");
}

std::tuple<double, Array, Array> LossAndGrad(const std::string& kind,
                                             const Array& a, const Array& b,
                                             double scale, bool symmetrize,
                                             double bce_threshold,
                                             double sfcl_threshold,
                                             std::optional<std::uint64_t> head_seed) {
  LossConfig cfg;
  cfg.kind = ParseLossKind(kind);
  cfg.scale = scale;
  cfg.symmetrize = symmetrize;
  cfg.bce_threshold = bce_threshold;
  cfg.sfcl_threshold = sfcl_threshold;
  cfg.Validate();
  const Tensor ta = ToTensor(a, true), tb = ToTensor(b, true);
  ProjectionHead head = ProjectionHead::Identity();
  if (head_seed) {
    Rng rng(*head_seed);
    head = ProjectionHead::Init(ta.cols(), rng);
  }
  const Tensor loss = LossOnInputs(cfg, ta, tb, head);
  Backward(loss);
  return {loss.item(), GradArray(ta), GradArray(tb)};
}

py::dict DatasetDict(const DomainDataset& d) {
  py::dict out;
  out["points"] = ToArray(d.points());
  out["labels"] = std::vector<std::size_t>(d.labels().begin(), d.labels().end());
  return out;
}

py::tuple MakePair(std::size_t classes, std::size_t n_per_class,
                   const std::string& shift_json, std::uint64_t seed) {
  const ShiftSpec shift = ShiftSpecFromJson(Json::parse(shift_json), DefaultBenchmarkShift());
  const auto [source, target] = MakeDomainPair(classes, n_per_class, shift, seed);
  return py::make_tuple(DatasetDict(source), DatasetDict(target));
}

std::string TrainJson(const std::string& train_json, const std::string& dataset_json,
                      std::uint64_t seed) {
  TrainConfig cfg = TrainConfigFromJson(Json::parse(train_json));
  cfg.seed = seed;
  const DatasetSpec dataset = DatasetSpecFromJson(Json::parse(dataset_json));
  RunRecord record;
  {
    py::gil_scoped_release release;
    record = Train(cfg, MakeProblem(dataset, seed));
  }
  Json intervals = Json::array();
  for (const MetricsRow& r : record.intervals) {
    intervals.push_back({{"step", r.step},
                         {"loss_total", r.loss_total},
                         {"loss_supervised", r.loss_supervised},
                         {"loss_contrastive", r.loss_contrastive},
                         {"loss_pseudo", r.loss_pseudo},
                         {"loss_regularizer", r.loss_regularizer},
                         {"target_accuracy", r.target_accuracy},
                         {"mean_max_prob", r.mean_max_prob},
                         {"deviation", r.deviation}});
  }
  Json out = {{"intervals", std::move(intervals)},
              {"steps_completed", record.steps_completed},
              {"diverged", record.diverged},
              {"failure", record.failure}};
  if (!record.diverged) out["final"] = ToJson(record.final);
  return out.dump();
}

std::string RunExperimentJson(const std::string& spec_json, bool force, std::size_t jobs) {
  const ExperimentSpec spec = ExperimentSpec::FromJson(Json::parse(spec_json));
  ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = RunExperiment(spec, {force, jobs, nullptr});
  }
  Json rows = Json::array();
  for (const ComparisonRow& r : result.table.rows) {
    Json row = ToJson(r.diagnostics);
    row["label"] = r.label;
    row["kind"] = r.kind;
    row["seed"] = r.seed;
    row["status"] = std::string(CellStatusName(r.status));
    row["message"] = r.message;
    rows.push_back(std::move(row));
  }
  return Json{{"rows", std::move(rows)},
              {"cells_trained", result.cells_trained},
              {"cells_cached", result.cells_cached},
              {"all_ok", result.all_ok},
              {"directory", spec.ExperimentDir().string()}}
      .dump();
}

}  // namespace
}  // namespace pcllab

PYBIND11_MODULE(_core, m) {
  using namespace pcllab;
  m.doc() = "pcllab native core";

  auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<LoadError>(m, "LoadError", base.ptr());

  m.def("softmax", [](const Array& x) { return ToArray(SoftmaxRows(ToTensor(x))); },
        py::arg("logits"));
  m.def("loss_and_grad", &LossAndGrad, py::arg("kind"), py::arg("view_a"),
        py::arg("view_b"), py::arg("scale") = kDefaultScale,
        py::arg("symmetrize") = true, py::arg("bce_threshold") = 0.95,
        py::arg("sfcl_threshold") = 0.95, py::arg("head_seed") = py::none());
  m.def("uniformity_regularizer",
        [](const Array& p) { return UniformityRegularizer(ToTensor(p)).item(); },
        py::arg("probs"));
  m.def("loss_kinds", [] {
    std::vector<std::string> out;
    for (LossKind k : kAllLossKinds) out.emplace_back(LossKindName(k));
    return out;
  });
  m.def("make_domain_pair", &MakePair, py::arg("classes"), py::arg("n_per_class"),
        py::arg("shift_json"), py::arg("seed"));
  m.def("train_json", &TrainJson, py::arg("train_json"), py::arg("dataset_json"),
        py::arg("seed"));
  m.def("run_experiment_json", &RunExperimentJson, py::arg("spec_json"),
        py::arg("force") = false, py::arg("jobs") = 1);
}
