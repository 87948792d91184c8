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

#ifndef KANMCP_TENSOR_HPP
#define KANMCP_TENSOR_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kanmcp {

#ifdef KANMCP_SINGLE_PRECISION
using Scalar = float;
#else
using Scalar = double;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of finite scalars with value semantics.
///
/// Shapes use positive extents; the empty shape denotes a scalar. Copies are
/// deep, so a tensor never aliases the buffer it was built from.
class Tensor {
 public:
  /// Scalar zero.
  Tensor();

  /// Throws ShapeMismatch when the element count disagrees with the shape
  /// and NonFiniteInput when any element is NaN or infinite.
  Tensor(Shape shape, std::vector<Scalar> data);

  /// Skips the finiteness check. Only for diagnostics that must carry
  /// non-finite values.
  static Tensor allow_nonfinite(Shape shape, std::vector<Scalar> data);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, Scalar value);
  static Tensor scalar(Scalar value);
  static Tensor vector(std::vector<Scalar> data);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t numel() const noexcept { return data_.size(); }
  bool is_scalar() const noexcept { return data_.size() == 1 && shape_.size() <= 1; }

  /// Row/column counts of a rank-2 tensor.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const Scalar> data() const noexcept { return data_; }
  const std::vector<Scalar>& vec() const noexcept { return data_; }

  /// In-place access for optimizers and builders; the finiteness invariant
  /// is the caller's responsibility.
  std::span<Scalar> mutable_data() noexcept { return data_; }

  Scalar operator[](std::size_t i) const { return data_[i]; }
  Scalar at(std::size_t r, std::size_t c) const;
  Scalar item() const;

  Tensor reshaped(Shape shape) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  struct Unchecked {};
  Tensor(Unchecked, Shape shape, std::vector<Scalar> data);

  Shape shape_;
  std::vector<Scalar> data_;
};

}  // namespace kanmcp

#endif  // KANMCP_TENSOR_HPP
