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

#include "gnnpeft/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "gnnpeft/errors.hpp"

namespace gnnpeft {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

thread_local Tape* g_active_tape = nullptr;

using ImplPtr = std::shared_ptr<TensorImpl>;

bool tracking(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

Tensor make_output(Shape shape, bool track) {
  return Tensor::zeros(std::move(shape), track);
}

void require_2d(const Tensor& t, std::string_view op) {
  if (t.dim() != 2) {
    throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " +
                         shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void check_segments(std::span<const int> ids, std::size_t count,
                    std::size_t num_segments, std::string_view op) {
  if (ids.size() != count) {
    throw DimensionError(std::string(op) + ": " + std::to_string(ids.size()) +
                         " ids for " + std::to_string(count) + " rows");
  }
  for (std::size_t e = 0; e < ids.size(); ++e) {
    if (ids[e] < 0 || static_cast<std::size_t>(ids[e]) >= num_segments) {
      throw IndexError(std::string(op) + ": id " + std::to_string(ids[e]) +
                       " at position " + std::to_string(e) +
                       " outside [0, " + std::to_string(num_segments) + ")");
    }
  }
}

double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (const auto e : shape) n *= e;
  return n;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto impl = std::make_shared<TensorImpl>();
  impl->data.assign(shape_numel(shape), value);
  impl->shape = std::move(shape);
  Tensor t(std::move(impl));
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("tensor of shape " + shape_str(shape) + " given " +
                         std::to_string(data.size()) + " values");
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  Tensor t(std::move(impl));
  t.set_requires_grad(requires_grad);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return full({1}, value, requires_grad);
}

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_str(shape()));
  }
  return impl_->data[0];
}

void Tensor::set_requires_grad(bool value) {
  impl_->requires_grad = value;
  if (value) {
    impl_->grad.assign(impl_->data.size(), 0.0);
  } else {
    impl_->grad.clear();
    impl_->grad.shrink_to_fit();
  }
}

void Tensor::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

void Tape::record(std::string_view op, std::vector<Tensor> inputs,
                  Tensor output, BackwardFn backward) {
  nodes_.push_back(
      Node{std::string(op), std::move(inputs), std::move(output), std::move(backward)});
}

void Tape::backward(Tensor& root) {
  if (!root.requires_grad()) {
    throw std::logic_error("backward(): root does not require grad");
  }
  auto g = root.grad();
  std::fill(g.begin(), g.end(), 1.0);
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->backward();
}

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

namespace ops {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner extents differ, " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const bool track = tracking({&a, &b});
  Tensor out = make_output({m, n}, track);
  if (m && n && k) {
    MatMap(out.data().data(), m, n).noalias() =
        ConstMatMap(a.data().data(), m, k) * ConstMatMap(b.data().data(), k, n);
  }
  if (track) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    Tape::active()->record("matmul", {a, b}, out, [ai, bi, oi, m, k, n] {
      if (m == 0 || k == 0 || n == 0) return;
      ConstMatMap g(oi->grad.data(), m, n);
      if (ai->requires_grad) {
        MatMap(ai->grad.data(), m, k).noalias() +=
            g * ConstMatMap(bi->data.data(), k, n).transpose();
      }
      if (bi->requires_grad) {
        MatMap(bi->grad.data(), k, n).noalias() +=
            ConstMatMap(ai->data.data(), m, k).transpose() * g;
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const bool track = tracking({&a, &b});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  if (track) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    Tape::active()->record("add", {a, b}, out, [ai, bi, oi] {
      for (auto* in : {ai.get(), bi.get()}) {
        if (!in->requires_grad) continue;
        for (std::size_t i = 0; i < oi->grad.size(); ++i) in->grad[i] += oi->grad[i];
      }
    });
  }
  return out;
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_2d(a, "add_bias");
  const std::size_t rows = a.rows(), d = a.cols();
  if (bias.numel() != d) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) +
                         " does not match " + shape_str(a.shape()));
  }
  const bool track = tracking({&a, &bias});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data(), b = bias.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < d; ++c) o[r * d + c] = x[r * d + c] + b[c];
  if (track) {
    ImplPtr ai = a.impl(), bi = bias.impl(), oi = out.impl();
    Tape::active()->record("add_bias", {a, bias}, out, [ai, bi, oi, rows, d] {
      if (ai->requires_grad)
        for (std::size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i];
      if (bi->requires_grad)
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < d; ++c) bi->grad[c] += oi->grad[r * d + c];
    });
  }
  return out;
}

Tensor mul_scalar(const Tensor& a, double s) {
  const bool track = tracking({&a});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * s;
  if (track) {
    ImplPtr ai = a.impl(), oi = out.impl();
    Tape::active()->record("mul_scalar", {a}, out, [ai, oi, s] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += oi->grad[i] * s;
    });
  }
  return out;
}

Tensor scale(const Tensor& a, const Tensor& s) {
  if (s.numel() != 1) {
    throw DimensionError("scale: factor must have one element, got " +
                         shape_str(s.shape()));
  }
  const bool track = tracking({&a, &s});
  Tensor out = make_output(a.shape(), track);
  const double f = s[0];
  auto o = out.data();
  const auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f * x[i];
  if (track) {
    ImplPtr ai = a.impl(), si = s.impl(), oi = out.impl();
    Tape::active()->record("scale", {a, s}, out, [ai, si, oi] {
      const double f = si->data[0];
      if (ai->requires_grad)
        for (std::size_t i = 0; i < oi->grad.size(); ++i) ai->grad[i] += f * oi->grad[i];
      if (si->requires_grad) {
        double acc = 0.0;
        for (std::size_t i = 0; i < oi->grad.size(); ++i) acc += oi->grad[i] * ai->data[i];
        si->grad[0] += acc;
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const bool track = tracking({&a, &b});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data(), y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  if (track) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    Tape::active()->record("mul", {a, b}, out, [ai, bi, oi] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) {
        if (ai->requires_grad) ai->grad[i] += oi->grad[i] * bi->data[i];
        if (bi->requires_grad) bi->grad[i] += oi->grad[i] * ai->data[i];
      }
    });
  }
  return out;
}

Tensor mul_cols(const Tensor& a, const Tensor& w) {
  require_2d(a, "mul_cols");
  const std::size_t rows = a.rows(), d = a.cols();
  if (w.numel() != d) {
    throw DimensionError("mul_cols: weights " + shape_str(w.shape()) +
                         " do not match " + shape_str(a.shape()));
  }
  const bool track = tracking({&a, &w});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data(), v = w.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < d; ++c) o[r * d + c] = x[r * d + c] * v[c];
  if (track) {
    ImplPtr ai = a.impl(), wi = w.impl(), oi = out.impl();
    Tape::active()->record("mul_cols", {a, w}, out, [ai, wi, oi, rows, d] {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          const double g = oi->grad[r * d + c];
          if (ai->requires_grad) ai->grad[r * d + c] += g * wi->data[c];
          if (wi->requires_grad) wi->grad[c] += g * ai->data[r * d + c];
        }
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& a) {
  const bool track = tracking({&a});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] > 0.0 ? x[i] : 0.0;
  if (track) {
    ImplPtr ai = a.impl(), oi = out.impl();
    Tape::active()->record("relu", {a}, out, [ai, oi] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i)
        if (ai->data[i] > 0.0) ai->grad[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& a) {
  const bool track = tracking({&a});
  Tensor out = make_output(a.shape(), track);
  auto o = out.data();
  const auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = stable_sigmoid(x[i]);
  if (track) {
    ImplPtr ai = a.impl(), oi = out.impl();
    Tape::active()->record("sigmoid", {a}, out, [ai, oi] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i) {
        const double s = oi->data[i];
        ai->grad[i] += oi->grad[i] * s * (1.0 - s);
      }
    });
  }
  return out;
}

Tensor dropout(const Tensor& a, double p, Rng& rng, Mode mode) {
  if (p < 0.0 || p >= 1.0) {
    throw std::invalid_argument("dropout: p must lie in [0, 1), got " +
                                std::to_string(p));
  }
  if (mode == Mode::kEval || p == 0.0) return a;
  const bool track = tracking({&a});
  Tensor out = make_output(a.shape(), track);
  auto mask = std::make_shared<std::vector<double>>(a.numel());
  const double keep_scale = 1.0 / (1.0 - p);
  auto o = out.data();
  const auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    (*mask)[i] = rng.uniform() < p ? 0.0 : keep_scale;
    o[i] = x[i] * (*mask)[i];
  }
  if (track) {
    ImplPtr ai = a.impl(), oi = out.impl();
    Tape::active()->record("dropout", {a}, out, [ai, oi, mask] {
      for (std::size_t i = 0; i < oi->grad.size(); ++i)
        ai->grad[i] += oi->grad[i] * (*mask)[i];
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& table, std::span<const int> index) {
  require_2d(table, "gather_rows");
  const std::size_t d = table.cols(), n = index.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= table.rows()) {
      throw IndexError("gather_rows: row " + std::to_string(index[i]) +
                       " outside table of " + std::to_string(table.rows()) +
                       " rows");
    }
  }
  const bool track = tracking({&table});
  Tensor out = make_output({n, d}, track);
  auto o = out.data();
  const auto t = table.data();
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(t.begin() + static_cast<std::ptrdiff_t>(index[i] * d), d,
                o.begin() + static_cast<std::ptrdiff_t>(i * d));
  if (track) {
    ImplPtr ti = table.impl(), oi = out.impl();
    auto idx = std::make_shared<std::vector<int>>(index.begin(), index.end());
    Tape::active()->record("gather_rows", {table}, out, [ti, oi, idx, d] {
      for (std::size_t i = 0; i < idx->size(); ++i) {
        double* dst = ti->grad.data() + static_cast<std::size_t>((*idx)[i]) * d;
        const double* src = oi->grad.data() + i * d;
        for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
      }
    });
  }
  return out;
}

Tensor scatter_sum(const Tensor& values, std::span<const int> segment_ids,
                   std::size_t num_segments) {
  require_2d(values, "scatter_sum");
  const std::size_t n = values.rows(), d = values.cols();
  check_segments(segment_ids, n, num_segments, "scatter_sum");
  const bool track = tracking({&values});
  Tensor out = make_output({num_segments, d}, track);
  auto o = out.data();
  const auto v = values.data();
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t s = static_cast<std::size_t>(segment_ids[e]);
    for (std::size_t c = 0; c < d; ++c) o[s * d + c] += v[e * d + c];
  }
  if (track) {
    ImplPtr vi = values.impl(), oi = out.impl();
    auto ids = std::make_shared<std::vector<int>>(segment_ids.begin(), segment_ids.end());
    Tape::active()->record("scatter_sum", {values}, out, [vi, oi, ids, d] {
      for (std::size_t e = 0; e < ids->size(); ++e) {
        const std::size_t s = static_cast<std::size_t>((*ids)[e]);
        for (std::size_t c = 0; c < d; ++c) vi->grad[e * d + c] += oi->grad[s * d + c];
      }
    });
  }
  return out;
}

Tensor segment_mean_pool(const Tensor& x, std::span<const int> segment_ids,
                         std::size_t num_segments) {
  require_2d(x, "segment_mean_pool");
  const std::size_t n = x.rows(), d = x.cols();
  check_segments(segment_ids, n, num_segments, "segment_mean_pool");
  auto counts = std::make_shared<std::vector<double>>(num_segments, 0.0);
  for (const int s : segment_ids) (*counts)[static_cast<std::size_t>(s)] += 1.0;
  const bool track = tracking({&x});
  Tensor out = make_output({num_segments, d}, track);
  auto o = out.data();
  const auto v = x.data();
  for (std::size_t e = 0; e < n; ++e) {
    const std::size_t s = static_cast<std::size_t>(segment_ids[e]);
    for (std::size_t c = 0; c < d; ++c) o[s * d + c] += v[e * d + c];
  }
  for (std::size_t s = 0; s < num_segments; ++s) {
    if ((*counts)[s] == 0.0) continue;
    for (std::size_t c = 0; c < d; ++c) o[s * d + c] /= (*counts)[s];
  }
  if (track) {
    ImplPtr xi = x.impl(), oi = out.impl();
    auto ids = std::make_shared<std::vector<int>>(segment_ids.begin(), segment_ids.end());
    Tape::active()->record("segment_mean_pool", {x}, out, [xi, oi, ids, counts, d] {
      for (std::size_t e = 0; e < ids->size(); ++e) {
        const std::size_t s = static_cast<std::size_t>((*ids)[e]);
        for (std::size_t c = 0; c < d; ++c)
          xi->grad[e * d + c] += oi->grad[s * d + c] / (*counts)[s];
      }
    });
  }
  return out;
}

Tensor row_dot(const Tensor& a, const Tensor& b) {
  require_2d(a, "row_dot");
  require_same_shape(a, b, "row_dot");
  const std::size_t n = a.rows(), d = a.cols();
  const bool track = tracking({&a, &b});
  Tensor out = make_output({n, 1}, track);
  const auto x = a.data(), y = b.data();
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) acc += x[r * d + c] * y[r * d + c];
    out[r] = acc;
  }
  if (track) {
    ImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
    Tape::active()->record("row_dot", {a, b}, out, [ai, bi, oi, n, d] {
      for (std::size_t r = 0; r < n; ++r) {
        const double g = oi->grad[r];
        for (std::size_t c = 0; c < d; ++c) {
          if (ai->requires_grad) ai->grad[r * d + c] += g * bi->data[r * d + c];
          if (bi->requires_grad) bi->grad[r * d + c] += g * ai->data[r * d + c];
        }
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  const bool track = tracking({&a});
  Tensor out = make_output({1}, track);
  double acc = 0.0;
  for (const double v : a.data()) acc += v;
  out[0] = acc;
  if (track) {
    ImplPtr ai = a.impl(), oi = out.impl();
    Tape::active()->record("sum", {a}, out, [ai, oi] {
      for (auto& g : ai->grad) g += oi->grad[0];
    });
  }
  return out;
}

Tensor batchnorm1d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormStats& stats, Mode mode,
                   const BatchNormOptions& options) {
  require_2d(x, "batchnorm1d");
  const std::size_t rows = x.rows(), d = x.cols();
  if (gamma.numel() != d || beta.numel() != d ||
      stats.running_mean.numel() != d || stats.running_var.numel() != d) {
    throw DimensionError("batchnorm1d: parameters do not match input " +
                         shape_str(x.shape()));
  }
  const auto in = x.data(), g = gamma.data(), b = beta.data();

  if (mode == Mode::kEval) {
    const bool track = tracking({&x, &gamma, &beta});
    Tensor out = make_output(x.shape(), track);
    auto o = out.data();
    auto inv_std = std::make_shared<std::vector<double>>(d);
    const auto rm = stats.running_mean.data(), rv = stats.running_var.data();
    for (std::size_t c = 0; c < d; ++c) (*inv_std)[c] = 1.0 / std::sqrt(rv[c] + options.eps);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < d; ++c)
        o[r * d + c] = (in[r * d + c] - rm[c]) * (*inv_std)[c] * g[c] + b[c];
    if (track) {
      ImplPtr xi = x.impl(), gi = gamma.impl(), bi = beta.impl(), oi = out.impl();
      ImplPtr mi = stats.running_mean.impl();
      Tape::active()->record("batchnorm1d_eval", {x, gamma, beta}, out,
                             [xi, gi, bi, oi, mi, inv_std, rows, d] {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < d; ++c) {
            const double go = oi->grad[r * d + c];
            const double xhat = (xi->data[r * d + c] - mi->data[c]) * (*inv_std)[c];
            if (xi->requires_grad) xi->grad[r * d + c] += go * gi->data[c] * (*inv_std)[c];
            if (gi->requires_grad) gi->grad[c] += go * xhat;
            if (bi->requires_grad) bi->grad[c] += go;
          }
        }
      });
    }
    return out;
  }

  if (rows < 2) {
    throw DegenerateBatchError("batchnorm1d: train mode needs at least 2 rows, got " +
                               std::to_string(rows));
  }
  const double n = static_cast<double>(rows);
  std::vector<double> mean(d, 0.0), var(d, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += in[r * d + c];
  for (auto& m : mean) m /= n;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = in[r * d + c] - mean[c];
      var[c] += dev * dev;
    }
  for (auto& v : var) v /= n;

  auto inv_std = std::make_shared<std::vector<double>>(d);
  for (std::size_t c = 0; c < d; ++c) (*inv_std)[c] = 1.0 / std::sqrt(var[c] + options.eps);

  const bool track = tracking({&x, &gamma, &beta});
  Tensor out = make_output(x.shape(), track);
  auto xhat = std::make_shared<std::vector<double>>(rows * d);
  auto o = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double h = (in[r * d + c] - mean[c]) * (*inv_std)[c];
      (*xhat)[r * d + c] = h;
      o[r * d + c] = h * g[c] + b[c];
    }
  }

  auto rm = stats.running_mean.data(), rv = stats.running_var.data();
  const double m = options.momentum;
  for (std::size_t c = 0; c < d; ++c) {
    rm[c] = (1.0 - m) * rm[c] + m * mean[c];
    rv[c] = (1.0 - m) * rv[c] + m * var[c] * n / (n - 1.0);
  }

  if (track) {
    ImplPtr xi = x.impl(), gi = gamma.impl(), bi = beta.impl(), oi = out.impl();
    Tape::active()->record("batchnorm1d", {x, gamma, beta}, out,
                           [xi, gi, bi, oi, xhat, inv_std, rows, d, n] {
      std::vector<double> sum_dxhat(d, 0.0), sum_dxhat_xhat(d, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          const double go = oi->grad[r * d + c];
          const double h = (*xhat)[r * d + c];
          if (gi->requires_grad) gi->grad[c] += go * h;
          if (bi->requires_grad) bi->grad[c] += go;
          const double dh = go * gi->data[c];
          sum_dxhat[c] += dh;
          sum_dxhat_xhat[c] += dh * h;
        }
      }
      if (!xi->requires_grad) return;
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
          const double dh = oi->grad[r * d + c] * gi->data[c];
          const double h = (*xhat)[r * d + c];
          xi->grad[r * d + c] += (*inv_std)[c] / n *
                                 (n * dh - sum_dxhat[c] - h * sum_dxhat_xhat[c]);
        }
      }
    });
  }
  return out;
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& target,
                       const Tensor& mask) {
  require_same_shape(logits, target, "bce_with_logits");
  require_same_shape(logits, mask, "bce_with_logits");
  const auto z = logits.data(), y = target.data(), w = mask.data();
  double count = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (w[i] == 0.0) continue;
    count += 1.0;
    acc += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  if (count == 0.0) {
    throw EmptyLossError("bce_with_logits: every entry is masked");
  }
  const bool track = tracking({&logits});
  Tensor out = make_output({1}, track);
  out[0] = acc / count;
  if (track) {
    ImplPtr zi = logits.impl(), yi = target.impl(), wi = mask.impl(), oi = out.impl();
    Tape::active()->record("bce_with_logits", {logits}, out, [zi, yi, wi, oi, count] {
      const double g = oi->grad[0] / count;
      for (std::size_t i = 0; i < zi->data.size(); ++i) {
        if (wi->data[i] == 0.0) continue;
        zi->grad[i] += g * (stable_sigmoid(zi->data[i]) - yi->data[i]);
      }
    });
  }
  return out;
}

}  // namespace ops
}  // namespace gnnpeft
