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

#include "pcllab/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "pcllab/errors.h"

namespace pcllab {

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

namespace detail {

void Node::EnsureGrad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Node::AccumulateGrad(std::size_t i, double v) {
  EnsureGrad();
  grad[i] += v;
}

}  // namespace detail

namespace {

using detail::Node;

void RequireRank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got shape " +
                         ShapeToString(t.shape()));
  }
}

std::vector<double> Map(std::span<const double> src, double (*fn)(double)) {
  std::vector<double> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(), fn);
  return out;
}

// Broadcast kinds for binary ops.
enum class Pairing { kSame, kScalarLeft, kScalarRight };

Pairing Pair(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Pairing::kSame;
  if (a.rank() == 0) return Pairing::kScalarLeft;
  if (b.rank() == 0) return Pairing::kScalarRight;
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeToString(a.shape()) + " and " +
                       ShapeToString(b.shape()));
}

// Applies `fn` elementwise under the pairing and returns the output shape.
template <typename Fn>
Shape ZipInto(const Tensor& a, const Tensor& b, Pairing p,
              std::vector<double>& out, Fn fn) {
  auto da = a.data();
  auto db = b.data();
  switch (p) {
    case Pairing::kSame:
      out.resize(da.size());
      for (std::size_t i = 0; i < da.size(); ++i) out[i] = fn(da[i], db[i]);
      return a.shape();
    case Pairing::kScalarLeft:
      out.resize(db.size());
      for (std::size_t i = 0; i < db.size(); ++i) out[i] = fn(da[0], db[i]);
      return b.shape();
    case Pairing::kScalarRight:
      out.resize(da.size());
      for (std::size_t i = 0; i < da.size(); ++i) out[i] = fn(da[i], db[0]);
      return a.shape();
  }
  return {};
}

// Index into an operand under broadcasting.
inline std::size_t Idx(bool scalar, std::size_t i) { return scalar ? 0 : i; }

}  // namespace

// ---- Tensor ----

Tensor::Tensor() : node_(std::make_shared<Node>()) {
  node_->data.assign(1, 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  if (NumElements(shape) != data.size()) {
    throw DimensionError("Tensor: shape " + ShapeToString(shape) + " needs " +
                         std::to_string(NumElements(shape)) +
                         " elements, got " + std::to_string(data.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  return Full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::Ones(Shape shape, bool requires_grad) {
  return Full(std::move(shape), 1.0, requires_grad);
}

Tensor Tensor::Full(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(NumElements(shape), value);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::Identity(std::size_t n) {
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
  return Tensor({n, n}, std::move(data));
}

Tensor Tensor::FromRows(const std::vector<std::vector<double>>& rows,
                        bool requires_grad) {
  const std::size_t n = rows.size();
  const std::size_t c = n == 0 ? 0 : rows.front().size();
  std::vector<double> data;
  data.reserve(n * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("FromRows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({n, c}, std::move(data), requires_grad);
}

std::size_t Tensor::rows() const {
  RequireRank2(*this, "rows");
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  RequireRank2(*this, "cols");
  return node_->shape[1];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item: tensor of shape " + ShapeToString(shape()) +
                        " is not a single value");
  }
  return node_->data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return node_->data[r * cols() + c];
}

void Tensor::set_requires_grad(bool value) {
  if (!node_->is_leaf()) {
    throw ContractError("set_requires_grad: only leaf tensors may be toggled");
  }
  node_->requires_grad = value;
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(numel(), 0.0);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  node_->EnsureGrad();
  return node_->grad;
}

void Tensor::ZeroGrad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->data); }

Tensor Tensor::clone() const {
  Tensor t(shape(), node_->data, node_->requires_grad && node_->is_leaf());
  return t;
}

std::vector<std::vector<double>> Tensor::ToRows() const {
  std::vector<std::vector<double>> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    auto begin = node_->data.begin() + static_cast<std::ptrdiff_t>(r * cols());
    out[r].assign(begin, begin + static_cast<std::ptrdiff_t>(cols()));
  }
  return out;
}

Tensor MakeResult(Shape shape, std::vector<double> data,
                  std::vector<Tensor> inputs,
                  std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  for (const auto& in : inputs) {
    if (in.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node_);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

const std::shared_ptr<detail::Node>& NodeOf(const Tensor& t) { return t.node_; }

// ---- Elementwise ----

Tensor Add(const Tensor& a, const Tensor& b) {
  const Pairing p = Pair(a, b, "Add");
  std::vector<double> out;
  Shape shape = ZipInto(a, b, p, out, [](double x, double y) { return x + y; });
  return MakeResult(std::move(shape), std::move(out), {a, b}, [p](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    const bool xs = p == Pairing::kScalarLeft;
    const bool ys = p == Pairing::kScalarRight;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (x.requires_grad) x.AccumulateGrad(Idx(xs, i), self.grad[i]);
      if (y.requires_grad) y.AccumulateGrad(Idx(ys, i), self.grad[i]);
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  const Pairing p = Pair(a, b, "Sub");
  std::vector<double> out;
  Shape shape = ZipInto(a, b, p, out, [](double x, double y) { return x - y; });
  return MakeResult(std::move(shape), std::move(out), {a, b}, [p](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    const bool xs = p == Pairing::kScalarLeft;
    const bool ys = p == Pairing::kScalarRight;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (x.requires_grad) x.AccumulateGrad(Idx(xs, i), self.grad[i]);
      if (y.requires_grad) y.AccumulateGrad(Idx(ys, i), -self.grad[i]);
    }
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  const Pairing p = Pair(a, b, "Mul");
  std::vector<double> out;
  Shape shape = ZipInto(a, b, p, out, [](double x, double y) { return x * y; });
  return MakeResult(std::move(shape), std::move(out), {a, b}, [p](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    const bool xs = p == Pairing::kScalarLeft;
    const bool ys = p == Pairing::kScalarRight;
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double xv = x.data[Idx(xs, i)];
      const double yv = y.data[Idx(ys, i)];
      if (x.requires_grad) x.AccumulateGrad(Idx(xs, i), self.grad[i] * yv);
      if (y.requires_grad) y.AccumulateGrad(Idx(ys, i), self.grad[i] * xv);
    }
  });
}

Tensor Scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  return MakeResult(a.shape(), std::move(out), {a}, [factor](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.AccumulateGrad(i, self.grad[i] * factor);
    }
  });
}

Tensor AddScalar(const Tensor& a, double value) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v += value;
  return MakeResult(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.AccumulateGrad(i, self.grad[i]);
    }
  });
}

Tensor Neg(const Tensor& a) { return Scale(a, -1.0); }

Tensor Exp(const Tensor& a) {
  auto out = Map(a.data(), [](double v) { return std::exp(v); });
  return MakeResult(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.AccumulateGrad(i, self.grad[i] * self.data[i]);
    }
  });
}

Tensor Log(const Tensor& a) {
  for (double v : a.data()) {
    if (!(v > 0.0)) {
      throw DomainError("Log: non-positive argument " + std::to_string(v));
    }
  }
  auto out = Map(a.data(), [](double v) { return std::log(v); });
  return MakeResult(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      x.AccumulateGrad(i, self.grad[i] / x.data[i]);
    }
  });
}

Tensor Relu(const Tensor& a) {
  auto out = Map(a.data(), [](double v) { return v > 0.0 ? v : 0.0; });
  return MakeResult(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (x.data[i] > 0.0) x.AccumulateGrad(i, self.grad[i]);
    }
  });
}

Tensor Tanh(const Tensor& a) {
  auto out = Map(a.data(), [](double v) { return std::tanh(v); });
  return MakeResult(a.shape(), std::move(out), {a}, [](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double y = self.data[i];
      x.AccumulateGrad(i, self.grad[i] * (1.0 - y * y));
    }
  });
}

Tensor Clamp(const Tensor& a, double lo, double hi) {
  if (lo > hi) throw ContractError("Clamp: lo > hi");
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v = std::clamp(v, lo, hi);
  return MakeResult(a.shape(), std::move(out), {a}, [lo, hi](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (x.data[i] >= lo && x.data[i] <= hi) {
        x.AccumulateGrad(i, self.grad[i]);
      }
    }
  });
}

Tensor Sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return MakeResult({}, {total}, {a}, [](Node& self) {
    Node& x = *self.inputs[0];
    x.EnsureGrad();
    for (double& g : x.grad) g += self.grad[0];
  });
}

Tensor Mean(const Tensor& a) {
  if (a.numel() == 0) throw ContractError("Mean: empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.numel()));
}

// ---- Matrix ops ----

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank2(a, "MatMul");
  RequireRank2(b, "MatMul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("MatMul: inner dimensions differ, " +
                         ShapeToString(a.shape()) + " x " +
                         ShapeToString(b.shape()));
  }
  auto da = a.data();
  auto db = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = da[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += av * db[p * n + j];
    }
  }
  return MakeResult({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    const auto& g = self.grad;
    if (x.requires_grad) {
      x.EnsureGrad();
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            acc += g[i * n + j] * y.data[p * n + j];
          }
          x.grad[i * k + p] += acc;
        }
      }
    }
    if (y.requires_grad) {
      y.EnsureGrad();
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = x.data[i * k + p];
          for (std::size_t j = 0; j < n; ++j) {
            y.grad[p * n + j] += av * g[i * n + j];
          }
        }
      }
    }
  });
}

Tensor Transpose(const Tensor& a) {
  RequireRank2(a, "Transpose");
  const std::size_t r = a.rows(), c = a.cols();
  auto d = a.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = d[i * c + j];
  }
  return MakeResult({c, r}, std::move(out), {a}, [r, c](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        x.AccumulateGrad(i * c + j, self.grad[j * r + i]);
      }
    }
  });
}

Tensor SoftmaxRows(const Tensor& logits) {
  RequireRank2(logits, "SoftmaxRows");
  const std::size_t n = logits.rows(), c = logits.cols();
  auto d = logits.data();
  std::vector<double> out(n * c);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = d.data() + i * c;
    const double m = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(row[j] - m);
      z += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
  }
  return MakeResult({n, c}, std::move(out), {logits}, [n, c](Node& self) {
    Node& x = *self.inputs[0];
    x.EnsureGrad();
    for (std::size_t i = 0; i < n; ++i) {
      const double* y = self.data.data() + i * c;
      const double* g = self.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) {
        x.grad[i * c + j] += y[j] * (g[j] - dot);
      }
    }
  });
}

Tensor L2Normalize(const Tensor& v) {
  RequireRank2(v, "L2Normalize");
  const std::size_t n = v.rows(), d = v.cols();
  auto src = v.data();
  std::vector<double> out(n * d);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += src[i * d + j] * src[i * d + j];
    const double norm = std::sqrt(sq);
    if (!(norm > kNormEpsilon)) {
      throw DegenerateInputError("L2Normalize: row " + std::to_string(i) +
                                 " has norm " + std::to_string(norm));
    }
    norms[i] = norm;
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = src[i * d + j] / norm;
  }
  return MakeResult(
      {n, d}, std::move(out), {v}, [n, d, norms = std::move(norms)](Node& self) {
        Node& x = *self.inputs[0];
        x.EnsureGrad();
        for (std::size_t i = 0; i < n; ++i) {
          const double* y = self.data.data() + i * d;
          const double* g = self.grad.data() + i * d;
          double dot = 0.0;
          for (std::size_t j = 0; j < d; ++j) dot += g[j] * y[j];
          for (std::size_t j = 0; j < d; ++j) {
            x.grad[i * d + j] += (g[j] - y[j] * dot) / norms[i];
          }
        }
      });
}

Tensor SumRows(const Tensor& a) {
  RequireRank2(a, "SumRows");
  const std::size_t n = a.rows(), c = a.cols();
  auto d = a.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i] += d[i * c + j];
  }
  return MakeResult({n}, std::move(out), {a}, [n, c](Node& self) {
    Node& x = *self.inputs[0];
    x.EnsureGrad();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) x.grad[i * c + j] += self.grad[i];
    }
  });
}

Tensor LogSumExpRows(const Tensor& a, std::span<const std::uint8_t> include) {
  RequireRank2(a, "LogSumExpRows");
  const std::size_t n = a.rows(), c = a.cols();
  if (include.size() != n * c) {
    throw DimensionError("LogSumExpRows: mask size does not match input");
  }
  auto d = a.data();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) {
      if (include[i * c + j]) m = std::max(m, d[i * c + j]);
    }
    if (std::isinf(m) && m < 0) {
      throw ContractError("LogSumExpRows: row " + std::to_string(i) +
                          " has no included entries");
    }
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (include[i * c + j]) z += std::exp(d[i * c + j] - m);
    }
    out[i] = m + std::log(z);
  }
  std::vector<std::uint8_t> mask(include.begin(), include.end());
  return MakeResult({n}, std::move(out), {a},
                    [n, c, mask = std::move(mask)](Node& self) {
                      Node& x = *self.inputs[0];
                      x.EnsureGrad();
                      for (std::size_t i = 0; i < n; ++i) {
                        for (std::size_t j = 0; j < c; ++j) {
                          if (!mask[i * c + j]) continue;
                          const double w =
                              std::exp(x.data[i * c + j] - self.data[i]);
                          x.grad[i * c + j] += self.grad[i] * w;
                        }
                      }
                    });
}

Tensor LogSumExpRows(const Tensor& a) {
  std::vector<std::uint8_t> all(a.numel(), 1);
  return LogSumExpRows(a, all);
}

Tensor Diagonal(const Tensor& a) {
  RequireRank2(a, "Diagonal");
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("Diagonal: matrix is not square");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a.data()[i * n + i];
  return MakeResult({n}, std::move(out), {a}, [n](Node& self) {
    Node& x = *self.inputs[0];
    for (std::size_t i = 0; i < n; ++i) x.AccumulateGrad(i * n + i, self.grad[i]);
  });
}

Tensor SelectPerRow(const Tensor& a, std::span<const std::size_t> index) {
  RequireRank2(a, "SelectPerRow");
  const std::size_t n = a.rows(), c = a.cols();
  if (index.size() != n) {
    throw DimensionError("SelectPerRow: need one index per row");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] >= c) {
      throw ContractError("SelectPerRow: column index " +
                          std::to_string(index[i]) + " out of range");
    }
    out[i] = a.data()[i * c + index[i]];
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return MakeResult({n}, std::move(out), {a},
                    [n, c, idx = std::move(idx)](Node& self) {
                      Node& x = *self.inputs[0];
                      for (std::size_t i = 0; i < n; ++i) {
                        x.AccumulateGrad(i * c + idx[i], self.grad[i]);
                      }
                    });
}

Tensor GatherRows(const Tensor& a, std::span<const std::size_t> rows) {
  RequireRank2(a, "GatherRows");
  const std::size_t c = a.cols();
  std::vector<double> out;
  out.reserve(rows.size() * c);
  for (std::size_t r : rows) {
    if (r >= a.rows()) throw ContractError("GatherRows: row out of range");
    auto begin = a.data().begin() + static_cast<std::ptrdiff_t>(r * c);
    out.insert(out.end(), begin, begin + static_cast<std::ptrdiff_t>(c));
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return MakeResult({idx.size(), c}, std::move(out), {a},
                    [c, idx](Node& self) {
                      Node& x = *self.inputs[0];
                      x.EnsureGrad();
                      for (std::size_t k = 0; k < idx.size(); ++k) {
                        for (std::size_t j = 0; j < c; ++j) {
                          x.grad[idx[k] * c + j] += self.grad[k * c + j];
                        }
                      }
                    });
}

Tensor ConcatCols(const Tensor& a, const Tensor& b) {
  RequireRank2(a, "ConcatCols");
  RequireRank2(b, "ConcatCols");
  if (a.rows() != b.rows()) {
    throw DimensionError("ConcatCols: row counts differ");
  }
  const std::size_t n = a.rows(), p = a.cols(), q = b.cols();
  std::vector<double> out(n * (p + q));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) out[i * (p + q) + j] = a.data()[i * p + j];
    for (std::size_t j = 0; j < q; ++j) {
      out[i * (p + q) + p + j] = b.data()[i * q + j];
    }
  }
  return MakeResult({n, p + q}, std::move(out), {a, b}, [n, p, q](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    for (std::size_t i = 0; i < n; ++i) {
      if (x.requires_grad) {
        for (std::size_t j = 0; j < p; ++j) {
          x.AccumulateGrad(i * p + j, self.grad[i * (p + q) + j]);
        }
      }
      if (y.requires_grad) {
        for (std::size_t j = 0; j < q; ++j) {
          y.AccumulateGrad(i * q + j, self.grad[i * (p + q) + p + j]);
        }
      }
    }
  });
}

Tensor PairwiseSquaredDistance(const Tensor& a, const Tensor& b) {
  RequireRank2(a, "PairwiseSquaredDistance");
  RequireRank2(b, "PairwiseSquaredDistance");
  if (a.cols() != b.cols()) {
    throw DimensionError("PairwiseSquaredDistance: widths differ");
  }
  const std::size_t n = a.rows(), m = b.rows(), d = a.cols();
  auto da = a.data();
  auto db = b.data();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = da[i * d + k] - db[j * d + k];
        acc += diff * diff;
      }
      out[i * m + j] = acc;
    }
  }
  return MakeResult({n, m}, std::move(out), {a, b}, [n, m, d](Node& self) {
    Node& x = *self.inputs[0];
    Node& y = *self.inputs[1];
    if (x.requires_grad) x.EnsureGrad();
    if (y.requires_grad) y.EnsureGrad();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double g = 2.0 * self.grad[i * m + j];
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = x.data[i * d + k] - y.data[j * d + k];
          if (x.requires_grad) x.grad[i * d + k] += g * diff;
          if (y.requires_grad) y.grad[j * d + k] -= g * diff;
        }
      }
    }
  });
}

}  // namespace pcllab
