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

#ifndef KANMCP_TESTS_SPLINE_PROPS_HPP
#define KANMCP_TESTS_SPLINE_PROPS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "kanmcp/rng.hpp"
#include "kanmcp/spline.hpp"

namespace kanmcp::testing {

/// Strictly increasing knots with random spacings in [0.1, 1).
inline spline::Grid random_grid(Rng& rng, int degree) {
  const std::size_t intervals = 1 + rng.uniform_int(8);
  std::vector<Scalar> knots{static_cast<Scalar>(rng.uniform(-2, 0))};
  for (std::size_t i = 1; i < intervals + 2 * static_cast<std::size_t>(degree) + 1; ++i) {
    knots.push_back(knots.back() + static_cast<Scalar>(rng.uniform(0.1, 1.0)));
  }
  return spline::Grid::from_knots(knots, degree);
}

/// Greville abscissae: the coefficients that make sum_i c_i B_i(x) = x.
inline std::vector<Scalar> greville(const spline::Grid& grid) {
  const auto& t = grid.knots();
  const int k = grid.degree();
  std::vector<Scalar> c(grid.basis_count());
  for (std::size_t i = 0; i < c.size(); ++i) {
    Scalar s = 0;
    for (int j = 1; j <= k; ++j) s += t[i + static_cast<std::size_t>(j)];
    c[i] = s / static_cast<Scalar>(k);
  }
  return c;
}

struct SplinePropertyReport {
  Scalar unity_error = 0;         // max |sum B_i - 1|
  Scalar min_value = 1;           // min B_i
  std::size_t support_violations = 0;
  Scalar constant_error = 0;      // max |sum c B_i - c|
  Scalar linear_error = 0;        // max |sum g_i B_i - x|
};

/// Checks the basis at `points` uniformly random interior points.
inline SplinePropertyReport check_spline_properties(Rng& rng, const spline::Grid& grid, int points) {
  SplinePropertyReport r;
  const auto& t = grid.knots();
  const int k = grid.degree();
  const std::vector<Scalar> g = greville(grid);
  const Scalar c = static_cast<Scalar>(rng.normal(0, 3));
  for (int n = 0; n < points; ++n) {
    const Scalar x = static_cast<Scalar>(rng.uniform(grid.t_min(), grid.t_max()));
    const std::vector<Scalar> b = spline::bspline_basis(x, grid);
    Scalar total = 0, constant = 0, linear = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      total += b[i];
      constant += c * b[i];
      linear += g[i] * b[i];
      r.min_value = std::min(r.min_value, b[i]);
      const bool outside = x < t[i] || x > t[i + static_cast<std::size_t>(k) + 1];
      const bool inside = x > t[i] && x < t[i + static_cast<std::size_t>(k) + 1];
      if ((outside && b[i] != 0) || (inside && !(b[i] > 0))) ++r.support_violations;
    }
    r.unity_error = std::max(r.unity_error, std::abs(total - 1));
    r.constant_error = std::max(r.constant_error, std::abs(constant - c));
    r.linear_error = std::max(r.linear_error, std::abs(linear - x));
  }
  return r;
}

}  // namespace kanmcp::testing

#endif  // KANMCP_TESTS_SPLINE_PROPS_HPP
