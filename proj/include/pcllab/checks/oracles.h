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


// Reference implementations written as plain loops over nested vectors.
// They share no code with the tensor library and exist to cross-check it.

#ifndef PCLLAB_CHECKS_ORACLES_H_
#define PCLLAB_CHECKS_ORACLES_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "pcllab/losses.h"
#include "pcllab/tensor.h"

namespace pcllab::oracle {

using Matrix = std::vector<std::vector<double>>;

Matrix ToMatrix(const Tensor& t);
Tensor FromMatrix(const Matrix& m);

Matrix Softmax(const Matrix& logits);
Matrix NormalizeRows(const Matrix& m);

enum class Similarity { kDot, kNegSquaredDistance };

// Mean over anchors of -log(exp(s sim(a_i, b_i)) / sum of exp over the
// other rows of `a` and all rows of `b`). Negatives whose similarity is
// above `drop_above` are skipped.
double InfoNce(const Matrix& a, const Matrix& b, double scale, bool symmetrize,
               Similarity sim = Similarity::kDot,
               std::optional<double> drop_above = std::nullopt);

struct DenseLayer {
  Matrix weight;  // out x in
  std::vector<double> bias;
};

double Fcl(const Matrix& fa, const Matrix& fb, const LossConfig& cfg);
double Pcl(const Matrix& pa, const Matrix& pb, const LossConfig& cfg);
double Lcl(const Matrix& za, const Matrix& zb, const LossConfig& cfg);
// Head: first layer, ReLU, second layer.
double Ntcl(const Matrix& fa, const Matrix& fb, const DenseLayer& first,
            const DenseLayer& second, const LossConfig& cfg);
double PclL2(const Matrix& pa, const Matrix& pb, const LossConfig& cfg);
double PclMse(const Matrix& pa, const Matrix& pb, const LossConfig& cfg);
double Bce(const Matrix& p0, const Matrix& p1, const LossConfig& cfg);
double Sfcl(const Matrix& fa, const Matrix& fb, const LossConfig& cfg);

double CrossEntropy(const Matrix& probs, const std::vector<std::size_t>& labels);
double PseudoLabel(const Matrix& weak, const Matrix& strong, double confidence);
double Uniformity(const Matrix& probs);

}  // namespace pcllab::oracle

#endif  // PCLLAB_CHECKS_ORACLES_H_
