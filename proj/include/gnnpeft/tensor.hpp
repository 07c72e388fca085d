// Copyright 2026 The gnnpeft Authors.
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

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnnpeft/rng.hpp"

namespace gnnpeft {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

enum class Mode { kTrain, kEval };

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
};

// Shared handle to dense row-major float64 storage. Copies alias the same
// storage (parameters in a registry and the tensors seen by the forward pass
// are the same object); use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t dim() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->data.size(); }
  // Leading extent; for 1-D tensors the only extent.
  std::size_t rows() const { return impl_->shape.empty() ? 1 : impl_->shape[0]; }
  // Trailing extent of a 2-D tensor, 1 otherwise.
  std::size_t cols() const {
    return impl_->shape.size() == 2 ? impl_->shape[1] : 1;
  }

  std::span<double> data() { return impl_->data; }
  std::span<const double> data() const { return impl_->data; }
  double& operator[](std::size_t i) { return impl_->data[i]; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  double& at(std::size_t r, std::size_t c) { return impl_->data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return impl_->data[r * cols() + c];
  }
  double item() const;

  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  // Allocates a zeroed gradient buffer when enabled, releases it otherwise.
  void set_requires_grad(bool value);
  std::span<double> grad() { return impl_->grad; }
  std::span<const double> grad() const { return impl_->grad; }
  void zero_grad();

  Tensor clone() const;
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;
};

// Records differentiable operations in execution order. Operations record
// themselves on the tape installed by the innermost TapeScope on the calling
// thread; with no active tape, ops run without recording and produce tensors
// that do not require gradients.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  struct Node {
    std::string op;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  void record(std::string_view op, std::vector<Tensor> inputs, Tensor output,
              BackwardFn backward);

  // Seeds d(root)/d(root) = 1 and runs every recorded rule once, newest
  // first. Gradients accumulate into leaf tensors that require them.
  void backward(Tensor& root);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  void clear() { nodes_.clear(); }

  static Tape* active();

 private:
  friend class TapeScope;
  std::vector<Node> nodes_;
};

class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// Running statistics updated by batchnorm1d in train mode.
struct BatchNormStats {
  Tensor running_mean;
  Tensor running_var;
};

struct BatchNormOptions {
  double momentum = 0.1;
  double eps = 1e-5;
};

namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
// a: B x d, bias: d
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor mul_scalar(const Tensor& a, double s);
// Multiplies every element of a by a learnable 1-element tensor.
Tensor scale(const Tensor& a, const Tensor& s);
Tensor mul(const Tensor& a, const Tensor& b);
// a: B x d, w: d; column-wise reweighting.
Tensor mul_cols(const Tensor& a, const Tensor& w);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// Identity in eval mode or when p == 0.
Tensor dropout(const Tensor& a, double p, Rng& rng, Mode mode);
// out[i] = table[index[i]]
Tensor gather_rows(const Tensor& table, std::span<const int> index);
// out[s] = sum of values[e] with segment_ids[e] == s
Tensor scatter_sum(const Tensor& values, std::span<const int> segment_ids,
                   std::size_t num_segments);
// Mean of rows per segment; empty segments give zero rows.
Tensor segment_mean_pool(const Tensor& x, std::span<const int> segment_ids,
                         std::size_t num_segments);
// Row-wise inner product: out[i] = <a[i], b[i]>, shape B x 1.
Tensor row_dot(const Tensor& a, const Tensor& b);
Tensor sum(const Tensor& a);
Tensor batchnorm1d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormStats& stats, Mode mode,
                   const BatchNormOptions& options = {});
// Mean of the numerically stable logistic loss over entries with mask != 0.
Tensor bce_with_logits(const Tensor& logits, const Tensor& target,
                       const Tensor& mask);

}  // namespace ops
}  // namespace gnnpeft
