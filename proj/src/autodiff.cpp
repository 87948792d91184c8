/*
 * Copyright 2026 The KAN-MCP Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kanmcp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "kanmcp/error.hpp"

namespace kanmcp {

const Tensor& Var::value() const {
  if (!node_) fail(ErrorKind::ShapeMismatch, "use of an empty Var");
  return node_->value();
}

bool Var::requires_grad() const { return node_ && node_->requires_grad(); }

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value_ = std::move(value);
  node->op_ = "constant";
  return Var(std::move(node));
}

Var make_op(std::string op, Tensor value, std::vector<Var> parents, BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->value_ = std::move(value);
  node->op_ = std::move(op);
  node->requires_grad_ =
      std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p.requires_grad(); });
  node->parents_ = std::move(parents);
  node->backward_ = std::move(backward);
  return Var(std::move(node));
}

Parameter::Parameter(std::string name, Tensor init) : node_(std::make_shared<Node>()) {
  if (name.empty()) fail(ErrorKind::ConfigError, "parameter name must be non-empty");
  node_->param_name_ = std::move(name);
  node_->value_ = std::move(init);
  node_->op_ = "parameter";
  node_->requires_grad_ = true;
}

Parameter::Parameter(const Parameter& other) {
  if (other.node_) *this = Parameter(other.name(), other.value());
}

Parameter& Parameter::operator=(const Parameter& other) {
  if (this != &other) {
    Parameter copy(other);
    node_ = std::move(copy.node_);
  }
  return *this;
}

void Parameter::assign(Tensor value) {
  if (value.shape() != node_->value_.shape()) {
    fail(ErrorKind::ShapeMismatch, "assigning " + shape_string(value.shape()) + " to parameter '" + name() +
                                       "' of shape " + shape_string(shape()));
  }
  node_->value_ = std::move(value);
}

GradientMap backward(const Var& loss) {
  if (!loss || !loss.value().is_scalar()) {
    fail(ErrorKind::NonScalarLoss,
         "backward() needs a scalar loss, got shape " + (loss ? shape_string(loss.shape()) : std::string("<empty>")));
  }

  // Iterative post-order DFS; grey nodes on the stack detect cycles.
  enum class Mark { kGrey, kBlack };
  std::unordered_map<const Node*, Mark> marks;
  std::vector<const Node*> order;
  std::vector<std::pair<const Node*, std::size_t>> stack{{loss.node(), 0}};
  marks[loss.node()] = Mark::kGrey;
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents().size()) {
      const Node* parent = node->parents()[next++].node();
      if (!parent->requires_grad()) continue;
      auto it = marks.find(parent);
      if (it == marks.end()) {
        marks[parent] = Mark::kGrey;
        stack.emplace_back(parent, 0);
      } else if (it->second == Mark::kGrey) {
        fail(ErrorKind::CycleDetected, "graph cycle through op '" + parent->op() + "'");
      }
    } else {
      marks[node] = Mark::kBlack;
      order.push_back(node);
      stack.pop_back();
    }
  }

  std::unordered_map<const Node*, std::vector<Scalar>> grads;
  auto buffer = [&](const Node* n) -> std::vector<Scalar>& {
    auto [it, inserted] = grads.try_emplace(n);
    if (inserted) it->second.assign(n->value().numel(), Scalar{0});
    return it->second;
  };
  buffer(loss.node())[0] = Scalar{1};

  std::vector<std::span<Scalar>> targets;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node* node = *it;
    if (!node->requires_grad() || !node->backward_fn()) continue;
    targets.clear();
    for (const Var& p : node->parents()) {
      if (p.requires_grad()) {
        targets.emplace_back(buffer(p.node()));
      } else {
        targets.emplace_back();
      }
    }
    const std::vector<Scalar>& g_out = buffer(node);
    node->backward_fn()(*node, g_out, targets);
  }

  GradientMap out;
  for (const Node* node : order) {
    if (!node->is_parameter()) continue;
    auto [it, inserted] = out.try_emplace(node->param_name(), node->value().shape(), buffer(node));
    if (!inserted) fail(ErrorKind::GroupMismatch, "duplicate parameter name '" + node->param_name() + "'");
  }
  return out;
}

Tensor gradient_or_zero(const GradientMap& grads, const Parameter& param) {
  auto it = grads.find(param.name());
  return it == grads.end() ? Tensor::zeros(param.shape()) : it->second;
}

Scalar grad_check(const std::function<Var()>& f, std::span<Parameter* const> params, Scalar step) {
  if (!(step > 0 && step <= Scalar(1e-2))) {
    fail(ErrorKind::DomainError, "grad_check step must lie in (0, 1e-2]");
  }
  const Var base = f();
  if (f().value() != base.value()) {
    fail(ErrorKind::NonDeterministicGraph, "two forward passes at the same parameters disagree");
  }
  const GradientMap grads = backward(base);

  Scalar worst = 0;
  for (Parameter* param : params) {
    const Tensor analytic = gradient_or_zero(grads, *param);
    for (std::size_t i = 0; i < param->numel(); ++i) {
      const Scalar original = param->mutable_data()[i];
      param->mutable_data()[i] = original + step;
      const Scalar plus = f().value().item();
      param->mutable_data()[i] = original - step;
      const Scalar minus = f().value().item();
      param->mutable_data()[i] = original;
      const Scalar central = (plus - minus) / (2 * step);
      const Scalar err = std::abs(analytic[i] - central) / std::max<Scalar>(1, std::abs(central));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Operations

namespace {

Tensor result(const char* op, Shape shape, std::vector<Scalar> data) {
  for (Scalar v : data) {
    if (!std::isfinite(v)) fail(ErrorKind::DomainError, std::string(op) + " produced a non-finite value");
  }
  return Tensor(std::move(shape), std::move(data));
}

template <typename Forward, typename Derivative>
Var unary(const char* op, const Var& x, Forward forward, Derivative derivative) {
  const auto& in = x.value().data();
  std::vector<Scalar> out(in.size());
  std::transform(in.begin(), in.end(), out.begin(), forward);
  return make_op(op, result(op, x.shape(), std::move(out)), {x},
                 [derivative](const Node& self, std::span<const Scalar> g, ParentGrads pg) {
                   const auto& xv = self.parents()[0].value().data();
                   const auto& yv = self.value().data();
                   for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i] * derivative(xv[i], yv[i]);
                 });
}

// Elementwise binary op with scalar-with-tensor broadcasting only.
template <typename Forward, typename Backward>
Var binary(const char* op, const Var& a, const Var& b, Forward forward, Backward partials) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Shape shape;
  if (av.shape() == bv.shape()) {
    shape = av.shape();
  } else if (av.is_scalar()) {
    shape = bv.shape();
  } else if (bv.is_scalar()) {
    shape = av.shape();
  } else {
    fail(ErrorKind::ShapeMismatch, std::string(op) + ": " + shape_string(av.shape()) + " vs " +
                                       shape_string(bv.shape()) + " (reshape explicitly)");
  }
  const std::size_t n = shape_numel(shape);
  const bool a_bcast = av.numel() != n;
  const bool b_bcast = bv.numel() != n;
  std::vector<Scalar> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = forward(av[a_bcast ? 0 : i], bv[b_bcast ? 0 : i]);
  return make_op(op, result(op, std::move(shape), std::move(out)), {a, b},
                 [partials, a_bcast, b_bcast](const Node& self, std::span<const Scalar> g, ParentGrads pg) {
                   const Tensor& x = self.parents()[0].value();
                   const Tensor& y = self.parents()[1].value();
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     const Scalar xi = x[a_bcast ? 0 : i];
                     const Scalar yi = y[b_bcast ? 0 : i];
                     const auto [da, db] = partials(xi, yi);
                     if (!pg[0].empty()) pg[0][a_bcast ? 0 : i] += g[i] * da;
                     if (!pg[1].empty()) pg[1][b_bcast ? 0 : i] += g[i] * db;
                   }
                 });
}

struct AxisSplit {
  std::size_t outer;
  std::size_t extent;
  std::size_t inner;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

Scalar sigmoid(Scalar x) { return Scalar{1} / (Scalar{1} + std::exp(-x)); }

}  // namespace

Var add(const Var& a, const Var& b) {
  return binary("add", a, b, [](Scalar x, Scalar y) { return x + y; },
                [](Scalar, Scalar) { return std::pair<Scalar, Scalar>{1, 1}; });
}

Var sub(const Var& a, const Var& b) {
  return binary("sub", a, b, [](Scalar x, Scalar y) { return x - y; },
                [](Scalar, Scalar) { return std::pair<Scalar, Scalar>{1, -1}; });
}

Var mul(const Var& a, const Var& b) {
  return binary("mul", a, b, [](Scalar x, Scalar y) { return x * y; },
                [](Scalar x, Scalar y) { return std::pair<Scalar, Scalar>{y, x}; });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    fail(ErrorKind::ShapeMismatch, "matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  std::vector<Scalar> out(m * n, Scalar{0});
  const auto& A = av.data();
  const auto& B = bv.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const Scalar aip = A[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += aip * B[p * n + j];
    }
  }
  return make_op("matmul", result("matmul", {m, n}, std::move(out)), {a, b},
                 [m, k, n](const Node& self, std::span<const Scalar> g, ParentGrads pg) {
                   const auto& A = self.parents()[0].value().data();
                   const auto& B = self.parents()[1].value().data();
                   if (!pg[0].empty()) {  // G * B^T
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t p = 0; p < k; ++p) {
                         Scalar acc = 0;
                         for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B[p * n + j];
                         pg[0][i * k + p] += acc;
                       }
                   }
                   if (!pg[1].empty()) {  // A^T * G
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t p = 0; p < k; ++p) {
                         const Scalar aip = A[i * k + p];
                         for (std::size_t j = 0; j < n; ++j) pg[1][p * n + j] += aip * g[i * n + j];
                       }
                   }
                 });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) fail(ErrorKind::ShapeMismatch, "concat of zero tensors");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) fail(ErrorKind::ShapeMismatch, "concat axis out of range for " + shape_string(first));
  Shape shape = first;
  shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const Var& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) fail(ErrorKind::ShapeMismatch, "concat: " + shape_string(first) + " vs " + shape_string(s));
    shape[axis] += s[axis];
    extents.push_back(s[axis]);
  }
  const AxisSplit split = split_axis(shape, axis);
  std::vector<Scalar> out;
  out.reserve(shape_numel(shape));
  for (std::size_t o = 0; o < split.outer; ++o) {
    for (const Var& p : parts) {
      const std::size_t chunk = p.shape()[axis] * split.inner;
      const auto& d = p.value().data();
      out.insert(out.end(), d.begin() + o * chunk, d.begin() + (o + 1) * chunk);
    }
  }
  std::vector<Var> parents(parts.begin(), parts.end());
  return make_op("concat", result("concat", std::move(shape), std::move(out)), std::move(parents),
                 [split, extents](const Node&, std::span<const Scalar> g, ParentGrads pg) {
                   std::size_t offset = 0;
                   for (std::size_t o = 0; o < split.outer; ++o) {
                     for (std::size_t k = 0; k < extents.size(); ++k) {
                       const std::size_t chunk = extents[k] * split.inner;
                       if (!pg[k].empty()) {
                         for (std::size_t i = 0; i < chunk; ++i) pg[k][o * chunk + i] += g[offset + i];
                       }
                       offset += chunk;
                     }
                   }
                 });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var slice(const Var& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in = x.shape();
  if (axis >= in.size() || begin >= end || end > in[axis]) {
    fail(ErrorKind::ShapeMismatch, "slice [" + std::to_string(begin) + "," + std::to_string(end) + ") on axis " +
                                       std::to_string(axis) + " of " + shape_string(in));
  }
  const AxisSplit split = split_axis(in, axis);
  Shape shape = in;
  shape[axis] = end - begin;
  const std::size_t width = (end - begin) * split.inner;
  const auto& d = x.value().data();
  std::vector<Scalar> out;
  out.reserve(split.outer * width);
  for (std::size_t o = 0; o < split.outer; ++o) {
    const auto start = d.begin() + (o * split.extent + begin) * split.inner;
    out.insert(out.end(), start, start + width);
  }
  return make_op("slice", result("slice", std::move(shape), std::move(out)), {x},
                 [split, begin, width](const Node&, std::span<const Scalar> g, ParentGrads pg) {
                   for (std::size_t o = 0; o < split.outer; ++o) {
                     const std::size_t base = (o * split.extent + begin) * split.inner;
                     for (std::size_t i = 0; i < width; ++i) pg[0][base + i] += g[o * width + i];
                   }
                 });
}

Var reshape(const Var& x, Shape shape) {
  Tensor value = x.value().reshaped(std::move(shape));
  return make_op("reshape", std::move(value), {x}, [](const Node&, std::span<const Scalar> g, ParentGrads pg) {
    for (std::size_t i = 0; i < g.size(); ++i) pg[0][i] += g[i];
  });
}

Var repeat_rows(const Var& row, std::size_t count) {
  const Shape& in = row.shape();
  const bool is_row = in.size() == 1 || (in.size() == 2 && in[0] == 1);
  if (!is_row || count == 0) {
    fail(ErrorKind::ShapeMismatch, "repeat_rows needs a row vector and count >= 1, got " + shape_string(in));
  }
  const std::size_t cols = in.back();
  const auto& d = row.value().data();
  std::vector<Scalar> out;
  out.reserve(count * cols);
  for (std::size_t r = 0; r < count; ++r) out.insert(out.end(), d.begin(), d.end());
  return make_op("repeat_rows", result("repeat_rows", {count, cols}, std::move(out)), {row},
                 [count, cols](const Node&, std::span<const Scalar> g, ParentGrads pg) {
                   for (std::size_t r = 0; r < count; ++r)
                     for (std::size_t c = 0; c < cols; ++c) pg[0][c] += g[r * cols + c];
                 });
}

Var sum(const Var& x) {
  Scalar total = 0;
  for (Scalar v : x.value().data()) total += v;
  return make_op("sum", result("sum", {}, {total}), {x}, [](const Node&, std::span<const Scalar> g, ParentGrads pg) {
    for (Scalar& t : pg[0]) t += g[0];
  });
}

Var mean(const Var& x) {
  const Scalar inv = Scalar{1} / static_cast<Scalar>(x.value().numel());
  Scalar total = 0;
  for (Scalar v : x.value().data()) total += v;
  return make_op("mean", result("mean", {}, {total * inv}), {x},
                 [inv](const Node&, std::span<const Scalar> g, ParentGrads pg) {
                   for (Scalar& t : pg[0]) t += g[0] * inv;
                 });
}

Var neg(const Var& x) {
  return unary("neg", x, [](Scalar v) { return -v; }, [](Scalar, Scalar) { return Scalar{-1}; });
}

// Subgradient 0 at the kink.
Var abs(const Var& x) {
  return unary("abs", x, [](Scalar v) { return std::abs(v); },
               [](Scalar v, Scalar) { return v > 0 ? Scalar{1} : (v < 0 ? Scalar{-1} : Scalar{0}); });
}

Var exp(const Var& x) {
  return unary("exp", x, [](Scalar v) { return std::exp(v); }, [](Scalar, Scalar y) { return y; });
}

Var log(const Var& x) {
  for (Scalar v : x.value().data()) {
    if (!(v > 0)) fail(ErrorKind::DomainError, "log of non-positive value " + std::to_string(v));
  }
  return unary("log", x, [](Scalar v) { return std::log(v); }, [](Scalar v, Scalar) { return Scalar{1} / v; });
}

Var silu(const Var& x) {
  return unary("silu", x, [](Scalar v) { return v * sigmoid(v); },
               [](Scalar v, Scalar) {
                 const Scalar s = sigmoid(v);
                 return s * (Scalar{1} + v * (Scalar{1} - s));
               });
}

Var tanh(const Var& x) {
  return unary("tanh", x, [](Scalar v) { return std::tanh(v); }, [](Scalar, Scalar y) { return Scalar{1} - y * y; });
}

Var square(const Var& x) {
  return unary("square", x, [](Scalar v) { return v * v; }, [](Scalar v, Scalar) { return 2 * v; });
}

Var sqrt(const Var& x) {
  for (Scalar v : x.value().data()) {
    if (!(v > 0)) fail(ErrorKind::DomainError, "sqrt of non-positive value " + std::to_string(v));
  }
  return unary("sqrt", x, [](Scalar v) { return std::sqrt(v); }, [](Scalar, Scalar y) { return Scalar{0.5} / y; });
}

// Gradient passes on the closed interval [lo, hi].
Var clamp(const Var& x, Scalar lo, Scalar hi) {
  if (!(lo <= hi)) fail(ErrorKind::DomainError, "clamp with lo > hi");
  return unary("clamp", x, [lo, hi](Scalar v) { return std::clamp(v, lo, hi); },
               [lo, hi](Scalar v, Scalar) { return (v >= lo && v <= hi) ? Scalar{1} : Scalar{0}; });
}

Var scale(const Var& x, Scalar factor) {
  return unary("scale", x, [factor](Scalar v) { return factor * v; }, [factor](Scalar, Scalar) { return factor; });
}

}  // namespace kanmcp
