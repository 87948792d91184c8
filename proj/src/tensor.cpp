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

#include "kanmcp/tensor.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "kanmcp/error.hpp"

namespace kanmcp {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

namespace {

void check_shape(const Shape& shape, std::size_t count) {
  for (std::size_t extent : shape) {
    if (extent == 0) fail(ErrorKind::ShapeMismatch, "zero extent in shape " + shape_string(shape));
  }
  if (shape_numel(shape) != count) {
    fail(ErrorKind::ShapeMismatch, "shape " + shape_string(shape) + " needs " +
                                       std::to_string(shape_numel(shape)) + " elements, got " +
                                       std::to_string(count));
  }
}

}  // namespace

Tensor::Tensor() : data_{Scalar{0}} {}

Tensor::Tensor(Shape shape, std::vector<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      fail(ErrorKind::NonFiniteInput, "non-finite element at flat index " + std::to_string(i));
    }
  }
}

Tensor::Tensor(Unchecked, Shape shape, std::vector<Scalar> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, data_.size());
}

Tensor Tensor::allow_nonfinite(Shape shape, std::vector<Scalar> data) {
  return Tensor(Unchecked{}, std::move(shape), std::move(data));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), Scalar{0}); }

Tensor Tensor::full(Shape shape, Scalar value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<Scalar>(n, value));
}

Tensor Tensor::scalar(Scalar value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::vector<Scalar> data) {
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> data) {
  return Tensor({rows, cols}, std::move(data));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) fail(ErrorKind::ShapeMismatch, "expected a matrix, got " + shape_string(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) fail(ErrorKind::ShapeMismatch, "expected a matrix, got " + shape_string(shape_));
  return shape_[1];
}

Scalar Tensor::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

Scalar Tensor::item() const {
  if (!is_scalar()) fail(ErrorKind::ShapeMismatch, "item() on non-scalar " + shape_string(shape_));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel()) {
    fail(ErrorKind::ShapeMismatch, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Tensor(Unchecked{}, std::move(shape), data_);
}

}  // namespace kanmcp
