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

#ifndef KANMCP_SPLINE_HPP
#define KANMCP_SPLINE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kanmcp/autodiff.hpp"
#include "kanmcp/tensor.hpp"

namespace kanmcp::spline {

inline constexpr int kMaxDegree = 5;

/// Extended knot vector of a degree-k B-spline basis. The first and last k
/// knots are padding; the interior range is [knots[k], knots[n-1-k]].
class Grid {
 public:
  /// `intervals` equal interior intervals on [lo, hi], padded with k knots
  /// of the same spacing on each side.
  static Grid uniform(std::size_t intervals, int degree, Scalar lo, Scalar hi);

  /// Throws DegenerateGrid unless the knots are strictly increasing, the
  /// degree is in [1, kMaxDegree], and there are at least 2k+2 knots.
  static Grid from_knots(std::vector<Scalar> knots, int degree);

  int degree() const noexcept { return degree_; }
  const std::vector<Scalar>& knots() const noexcept { return knots_; }
  Scalar t_min() const { return knots_[degree_]; }
  Scalar t_max() const { return knots_[knots_.size() - 1 - degree_]; }
  std::size_t intervals() const { return knots_.size() - 2 * degree_ - 1; }
  /// G + k.
  std::size_t basis_count() const { return knots_.size() - degree_ - 1; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Grid(std::vector<Scalar> knots, int degree) : knots_(std::move(knots)), degree_(degree) {}

  std::vector<Scalar> knots_;
  int degree_ = 1;
};

/// The k+1 possibly non-zero basis values (and their x-derivatives) at a
/// point, starting at basis index `first`.
struct BasisWindow {
  std::size_t first = 0;
  std::array<Scalar, kMaxDegree + 1> values{};
  std::array<Scalar, kMaxDegree + 1> derivatives{};
  /// x fell outside [t_min, t_max] and was clamped; derivatives are zero.
  bool clamped = false;
};

/// Cox-de Boor evaluation at x, clamped to the interior range.
BasisWindow basis_window(Scalar x, const Grid& grid);

/// Dense basis vector of length G + k.
std::vector<Scalar> bspline_basis(Scalar x, const Grid& grid);
std::vector<Scalar> bspline_basis_derivative(Scalar x, const Grid& grid);

/// dot(coef, basis). Throws ShapeMismatch on length disagreement.
Scalar spline_eval(std::span<const Scalar> coef, std::span<const Scalar> basis);

/// Elementwise spline curve s(x_i) = sum_j coef_j B_j(x_i); differentiable
/// in both the coefficient vector and x.
Var spline_curve(const Var& coef, const Var& x, const Grid& grid);

/// Least-squares coefficients for samples (xs, ys) through ridge-damped
/// (1e-8) normal equations. Throws RankDeficient when the samples cannot
/// determine every coefficient.
std::vector<Scalar> fit_coef_lsq(std::span<const Scalar> xs, std::span<const Scalar> ys, const Grid& grid);

/// Number of evaluations that clamped their input since the last reset.
std::uint64_t clamp_events();
void reset_clamp_events();

}  // namespace kanmcp::spline

#endif  // KANMCP_SPLINE_HPP
