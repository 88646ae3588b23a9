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


#include "pcllab/checks/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcllab::oracle {

namespace {

constexpr double kFloor = 1e-12;

double Dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double NegSqDist(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return -s;
}

double Direction(const Matrix& a, const Matrix& b, double scale, Similarity sim,
                 std::optional<double> drop_above) {
  auto similarity = [&](const std::vector<double>& x, const std::vector<double>& y) {
    return sim == Similarity::kDot ? Dot(x, y) : NegSqDist(x, y);
  };
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> terms;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = similarity(a[i], a[j]);
      if (drop_above && v > *drop_above) continue;
      terms.push_back(scale * v);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = similarity(a[i], b[j]);
      if (j != i && drop_above && v > *drop_above) continue;
      terms.push_back(scale * v);
    }
    const double peak = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - peak);
    total += peak + std::log(sum) - scale * similarity(a[i], b[i]);
  }
  return total / static_cast<double>(n);
}

std::vector<double> Dense(const DenseLayer& layer, const std::vector<double>& x) {
  std::vector<double> y(layer.weight.size());
  for (std::size_t o = 0; o < y.size(); ++o) {
    y[o] = Dot(layer.weight[o], x) + (layer.bias.empty() ? 0.0 : layer.bias[o]);
  }
  return y;
}

Matrix Head(const Matrix& f, const DenseLayer& first, const DenseLayer& second) {
  Matrix out;
  for (const auto& row : f) {
    auto h = Dense(first, row);
    for (double& v : h) v = std::max(v, 0.0);
    out.push_back(Dense(second, h));
  }
  return out;
}

double SafeLog(double p) { return std::log(std::clamp(p, kFloor, 1.0)); }

}  // namespace

Matrix ToMatrix(const Tensor& t) { return t.ToRows(); }

Tensor FromMatrix(const Matrix& m) { return Tensor::FromRows(m); }

Matrix Softmax(const Matrix& logits) {
  Matrix out = logits;
  for (auto& row : out) {
    const double peak = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - peak);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return out;
}

Matrix NormalizeRows(const Matrix& m) {
  Matrix out = m;
  for (auto& row : out) {
    const double norm = std::sqrt(Dot(row, row));
    for (double& v : row) v /= norm;
  }
  return out;
}

double InfoNce(const Matrix& a, const Matrix& b, double scale, bool symmetrize,
               Similarity sim, std::optional<double> drop_above) {
  const double forward = Direction(a, b, scale, sim, drop_above);
  if (!symmetrize) return forward;
  return 0.5 * (forward + Direction(b, a, scale, sim, drop_above));
}

double Fcl(const Matrix& fa, const Matrix& fb, const LossConfig& cfg) {
  return InfoNce(NormalizeRows(fa), NormalizeRows(fb), cfg.scale, cfg.symmetrize);
}

double Pcl(const Matrix& pa, const Matrix& pb, const LossConfig& cfg) {
  return InfoNce(pa, pb, cfg.scale, cfg.symmetrize);
}

double Lcl(const Matrix& za, const Matrix& zb, const LossConfig& cfg) {
  return Fcl(za, zb, cfg);
}

double Ntcl(const Matrix& fa, const Matrix& fb, const DenseLayer& first,
            const DenseLayer& second, const LossConfig& cfg) {
  return Fcl(Head(fa, first, second), Head(fb, first, second), cfg);
}

double PclL2(const Matrix& pa, const Matrix& pb, const LossConfig& cfg) {
  return Fcl(pa, pb, cfg);
}

double PclMse(const Matrix& pa, const Matrix& pb, const LossConfig& cfg) {
  return InfoNce(pa, pb, cfg.scale, cfg.symmetrize, Similarity::kNegSquaredDistance);
}

double Bce(const Matrix& p0, const Matrix& p1, const LossConfig& cfg) {
  const Matrix* views[2] = {&p0, &p1};
  const std::size_t n = p0.size();
  double total = 0.0;
  for (const Matrix* u : views) {
    for (const Matrix* v : views) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double p = Dot((*u)[i], (*v)[j]);
          const bool similar = i == j || p >= cfg.bce_threshold;
          total -= similar ? SafeLog(p) : SafeLog(1.0 - p);
        }
      }
    }
  }
  return total;
}

double Sfcl(const Matrix& fa, const Matrix& fb, const LossConfig& cfg) {
  std::optional<double> drop;
  if (cfg.sfcl_threshold < 1.0) drop = cfg.sfcl_threshold;
  return InfoNce(NormalizeRows(fa), NormalizeRows(fb), cfg.scale, cfg.symmetrize,
                 Similarity::kDot, drop);
}

double CrossEntropy(const Matrix& probs, const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) total -= SafeLog(probs[i][labels[i]]);
  return total / static_cast<double>(probs.size());
}

double PseudoLabel(const Matrix& weak, const Matrix& strong, double confidence) {
  double total = 0.0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < weak.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < weak[i].size(); ++c) {
      if (weak[i][c] > weak[i][best]) best = c;
    }
    if (weak[i][best] < confidence) continue;
    total -= SafeLog(strong[i][best]);
    ++kept;
  }
  return kept == 0 ? 0.0 : total / static_cast<double>(kept);
}

double Uniformity(const Matrix& probs) {
  double total = 0.0;
  for (const auto& row : probs) {
    for (double p : row) total -= SafeLog(p) / static_cast<double>(row.size());
  }
  return total;
}

}  // namespace pcllab::oracle
