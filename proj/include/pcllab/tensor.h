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

// Dense float64 tensors with define-by-run reverse-mode differentiation.
//
// A Tensor is a reference handle: copies share storage and graph position,
// the same way framework tensors behave. Use clone() for a deep copy and
// detach() to cut a value out of the graph.
//
// Broadcasting is limited to scalar-with-tensor and equal shapes.

#ifndef PCLLAB_TENSOR_H_
#define PCLLAB_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pcllab {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Rows with Euclidean norm at or below this are rejected by L2Normalize.
inline constexpr double kNormEpsilon = 1e-12;

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  // Sized lazily by the first backward pass that reaches this node.
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads `self.grad` and accumulates into the grads of `self.inputs`.
  std::function<void(Node& self)> backward;

  bool is_leaf() const { return inputs.empty(); }
  void AccumulateGrad(std::size_t i, double v);
  void EnsureGrad();
};

}  // namespace detail

class Tensor {
 public:
  // Rank-0 zero.
  Tensor();
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Ones(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value, bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);
  // Row-major n x n identity.
  static Tensor Identity(std::size_t n);
  static Tensor FromRows(const std::vector<std::vector<double>>& rows,
                         bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }
  // Only valid for rank-2 tensors.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const { return node_->data; }
  // Direct write access. Intended for optimizers and finite differencing
  // on leaves; writing into an interior node invalidates its graph.
  std::span<double> mutable_data() { return node_->data; }

  double item() const;
  double at(std::size_t i) const { return node_->data[i]; }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value);

  bool has_grad() const { return !node_->grad.empty(); }
  // Zero-filled when no gradient has been accumulated yet.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void ZeroGrad();

  // Same values, no graph history, requires_grad = false.
  Tensor detach() const;
  Tensor clone() const;

  std::vector<std::vector<double>> ToRows() const;

  // Identity of the underlying storage.
  bool SameStorage(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node)
      : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;

  friend class GradTape;
  friend Tensor MakeResult(Shape shape, std::vector<double> data,
                           std::vector<Tensor> inputs,
                           std::function<void(detail::Node&)> backward);
  friend const std::shared_ptr<detail::Node>& NodeOf(const Tensor& t);
};

// Builds an op output. When any input requires grad, the result records
// `inputs` and `backward`; otherwise both are dropped.
Tensor MakeResult(Shape shape, std::vector<double> data,
                  std::vector<Tensor> inputs,
                  std::function<void(detail::Node&)> backward);
const std::shared_ptr<detail::Node>& NodeOf(const Tensor& t);

// ---- Elementwise and reductions ----

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double factor);
Tensor AddScalar(const Tensor& a, double value);
Tensor Neg(const Tensor& a);
Tensor Exp(const Tensor& a);
// Throws DomainError when any element is <= 0.
Tensor Log(const Tensor& a);
Tensor Relu(const Tensor& a);
Tensor Tanh(const Tensor& a);
// Gradient passes where lo <= a <= hi.
Tensor Clamp(const Tensor& a, double lo, double hi);
Tensor Sum(const Tensor& a);
// Mean of zero elements is a contract violation.
Tensor Mean(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return Add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return Sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return Mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return Scale(a, s); }
inline Tensor operator*(const Tensor& a, double s) { return Scale(a, s); }
inline Tensor operator-(const Tensor& a) { return Neg(a); }

// ---- Matrix ops (rank 2 unless noted) ----

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);
// Row-wise softmax with per-row max subtraction.
Tensor SoftmaxRows(const Tensor& logits);
// Each row divided by its Euclidean norm. Throws DegenerateInputError when a
// row norm is <= kNormEpsilon.
Tensor L2Normalize(const Tensor& v);
// n x c -> n.
Tensor SumRows(const Tensor& a);
// Stabilized log-sum-exp of each row over entries where `include` is nonzero.
// `include` is row-major with the same element count as `a`; every row must
// include at least one entry. n x c -> n.
Tensor LogSumExpRows(const Tensor& a, std::span<const std::uint8_t> include);
Tensor LogSumExpRows(const Tensor& a);
// n x n -> n.
Tensor Diagonal(const Tensor& a);
// out[i] = a[i, index[i]]. n x c -> n.
Tensor SelectPerRow(const Tensor& a, std::span<const std::size_t> index);
// Rows of `a` listed in `rows`, in order. Output may have zero rows.
Tensor GatherRows(const Tensor& a, std::span<const std::size_t> rows);
// n x p, n x q -> n x (p + q).
Tensor ConcatCols(const Tensor& a, const Tensor& b);
// out[i, j] = ||a_i - b_j||^2. n x d, m x d -> n x m.
Tensor PairwiseSquaredDistance(const Tensor& a, const Tensor& b);

}  // namespace pcllab

#endif  // PCLLAB_TENSOR_H_
