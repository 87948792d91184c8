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

#ifndef KANMCP_AUTODIFF_HPP
#define KANMCP_AUTODIFF_HPP

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kanmcp/tensor.hpp"

namespace kanmcp {

class Node;
class Parameter;

/// Handle to a node of the define-by-run graph. Cheap to copy.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  const Node* node() const noexcept { return node_.get(); }
  explicit operator bool() const noexcept { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<const Node> node_;
};

/// Accumulation targets handed to a backward rule, one per parent. A span is
/// empty when that parent does not lead to any trainable parameter.
using ParentGrads = std::span<const std::span<Scalar>>;

/// Adds the contribution of `grad_out` (d loss / d self) into each parent's
/// gradient buffer.
using BackwardFn = std::function<void(const Node& self, std::span<const Scalar> grad_out, ParentGrads parent_grads)>;

class Node {
 public:
  const Tensor& value() const noexcept { return value_; }
  const std::vector<Var>& parents() const noexcept { return parents_; }
  const std::string& op() const noexcept { return op_; }
  const std::string& param_name() const noexcept { return param_name_; }
  bool is_parameter() const noexcept { return !param_name_.empty(); }
  bool requires_grad() const noexcept { return requires_grad_; }
  const BackwardFn& backward_fn() const noexcept { return backward_; }

 private:
  friend class Parameter;
  friend Var constant(Tensor value);
  friend Var make_op(std::string op, Tensor value, std::vector<Var> parents, BackwardFn backward);

  Tensor value_;
  std::vector<Var> parents_;
  BackwardFn backward_;
  std::string op_;
  std::string param_name_;
  bool requires_grad_ = false;
};

/// Non-trainable leaf.
Var constant(Tensor value);

/// Registers a new operation node. Custom differentiable operations (for
/// example fused layers) are built through this entry point.
Var make_op(std::string op, Tensor value, std::vector<Var> parents, BackwardFn backward);

/// Named trainable leaf. Copies are deep: a copied parameter owns a fresh
/// node, so model copies never share state.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Tensor init);
  Parameter(const Parameter& other);
  Parameter& operator=(const Parameter& other);
  Parameter(Parameter&&) noexcept = default;
  Parameter& operator=(Parameter&&) noexcept = default;

  const std::string& name() const { return node_->param_name_; }
  const Tensor& value() const { return node_->value_; }
  const Shape& shape() const { return node_->value_.shape(); }
  std::size_t numel() const { return node_->value_.numel(); }
  Var var() const { return Var(node_); }

  void assign(Tensor value);
  std::span<Scalar> mutable_data() { return node_->value_.mutable_data(); }

 private:
  std::shared_ptr<Node> node_;
};

/// Parameter name -> d loss / d parameter, for every parameter reachable
/// from the loss. Ordered so that iteration is deterministic.
using GradientMap = std::map<std::string, Tensor>;

/// Reverse-mode sweep from a scalar loss. The graph is left untouched, so a
/// second backward over shared subgraphs is valid.
GradientMap backward(const Var& loss);

/// Gradient of `param` in `grads`, or zeros when it was unreachable.
Tensor gradient_or_zero(const GradientMap& grads, const Parameter& param);

/// Max over all entries of |autodiff - central difference| /
/// max(1, |central difference|). `f` rebuilds the graph on every call.
Scalar grad_check(const std::function<Var()>& f, std::span<Parameter* const> params, Scalar step = 1e-5);

// Operation set. No implicit broadcasting except scalar-with-tensor in the
// elementwise binary ops.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var matmul(const Var& a, const Var& b);
Var concat(std::span<const Var> parts, std::size_t axis);
Var concat(std::initializer_list<Var> parts, std::size_t axis);
Var slice(const Var& x, std::size_t axis, std::size_t begin, std::size_t end);
Var reshape(const Var& x, Shape shape);
Var repeat_rows(const Var& row, std::size_t count);
Var sum(const Var& x);
Var mean(const Var& x);
Var neg(const Var& x);
Var abs(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
Var silu(const Var& x);
Var tanh(const Var& x);
Var square(const Var& x);
Var sqrt(const Var& x);
Var clamp(const Var& x, Scalar lo, Scalar hi);
Var scale(const Var& x, Scalar factor);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(Scalar c, const Var& x) { return scale(x, c); }

}  // namespace kanmcp

#endif  // KANMCP_AUTODIFF_HPP
