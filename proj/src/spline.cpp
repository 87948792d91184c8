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

#include "kanmcp/spline.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include <Eigen/Dense>

#include "kanmcp/error.hpp"

namespace kanmcp::spline {

namespace {

std::atomic<std::uint64_t> g_clamp_events{0};

}  // namespace

std::uint64_t clamp_events() { return g_clamp_events.load(std::memory_order_relaxed); }
void reset_clamp_events() { g_clamp_events.store(0, std::memory_order_relaxed); }

Grid Grid::uniform(std::size_t intervals, int degree, Scalar lo, Scalar hi) {
  if (intervals == 0 || !(lo < hi)) {
    fail(ErrorKind::DegenerateGrid, "uniform grid needs >= 1 interval and lo < hi");
  }
  const Scalar h = (hi - lo) / static_cast<Scalar>(intervals);
  std::vector<Scalar> knots;
  const long first = -static_cast<long>(degree);
  const long last = static_cast<long>(intervals) + degree;
  for (long i = first; i <= last; ++i) {
    // Interior endpoints are set exactly so that the range is [lo, hi].
    if (i == 0) {
      knots.push_back(lo);
    } else if (i == static_cast<long>(intervals)) {
      knots.push_back(hi);
    } else {
      knots.push_back(lo + h * static_cast<Scalar>(i));
    }
  }
  return from_knots(std::move(knots), degree);
}

Grid Grid::from_knots(std::vector<Scalar> knots, int degree) {
  if (degree < 1 || degree > kMaxDegree) {
    fail(ErrorKind::DegenerateGrid, "degree " + std::to_string(degree) + " outside [1, " +
                                        std::to_string(kMaxDegree) + "]");
  }
  if (knots.size() < static_cast<std::size_t>(2 * degree + 2)) {
    fail(ErrorKind::DegenerateGrid, "need at least 2k+2 = " + std::to_string(2 * degree + 2) + " knots, got " +
                                        std::to_string(knots.size()));
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) {
      fail(ErrorKind::DegenerateGrid, "knots not strictly increasing at index " + std::to_string(i));
    }
  }
  return Grid(std::move(knots), degree);
}

BasisWindow basis_window(Scalar x, const Grid& grid) {
  const auto& U = grid.knots();
  const int p = grid.degree();
  const std::size_t n = grid.basis_count();

  BasisWindow w;
  if (x < grid.t_min() || x > grid.t_max()) {
    w.clamped = true;
    g_clamp_events.fetch_add(1, std::memory_order_relaxed);
    x = std::clamp(x, grid.t_min(), grid.t_max());
  }

  // Span i with U[i] <= x < U[i+1], using the last interior span at t_max.
  auto it = std::upper_bound(U.begin() + p, U.begin() + static_cast<long>(n) + 1, x);
  std::size_t span = static_cast<std::size_t>(it - U.begin()) - 1;
  span = std::min(span, n - 1);
  w.first = span - static_cast<std::size_t>(p);

  // Triangular Cox-de Boor recursion; keeps the degree p-1 row for the
  // derivative.
  std::array<Scalar, kMaxDegree + 1> N{};
  std::array<Scalar, kMaxDegree + 1> lower{};
  std::array<Scalar, kMaxDegree + 1> left{};
  std::array<Scalar, kMaxDegree + 1> right{};
  N[0] = 1;
  for (int j = 1; j <= p; ++j) {
    if (j == p) lower = N;
    left[j] = x - U[span + 1 - j];
    right[j] = U[span + j] - x;
    Scalar saved = 0;
    for (int r = 0; r < j; ++r) {
      const Scalar temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
  w.values = N;

  if (!w.clamped) {
    for (int a = 0; a <= p; ++a) {
      const std::size_t r = w.first + static_cast<std::size_t>(a);
      Scalar d = 0;
      if (a >= 1) d += p / (U[r + p] - U[r]) * lower[a - 1];
      if (a <= p - 1) d -= p / (U[r + p + 1] - U[r + 1]) * lower[a];
      w.derivatives[a] = d;
    }
  }
  return w;
}

std::vector<Scalar> bspline_basis(Scalar x, const Grid& grid) {
  const BasisWindow w = basis_window(x, grid);
  std::vector<Scalar> out(grid.basis_count(), Scalar{0});
  for (int a = 0; a <= grid.degree(); ++a) out[w.first + a] = w.values[a];
  return out;
}

std::vector<Scalar> bspline_basis_derivative(Scalar x, const Grid& grid) {
  const BasisWindow w = basis_window(x, grid);
  std::vector<Scalar> out(grid.basis_count(), Scalar{0});
  for (int a = 0; a <= grid.degree(); ++a) out[w.first + a] = w.derivatives[a];
  return out;
}

Scalar spline_eval(std::span<const Scalar> coef, std::span<const Scalar> basis) {
  if (coef.size() != basis.size()) {
    fail(ErrorKind::ShapeMismatch, "spline_eval: " + std::to_string(coef.size()) + " coefficients vs " +
                                       std::to_string(basis.size()) + " basis values");
  }
  Scalar acc = 0;
  for (std::size_t i = 0; i < coef.size(); ++i) acc += coef[i] * basis[i];
  return acc;
}

Var spline_curve(const Var& coef, const Var& x, const Grid& grid) {
  const Tensor& c = coef.value();
  if (c.rank() != 1 || c.numel() != grid.basis_count()) {
    fail(ErrorKind::ShapeMismatch, "spline_curve: coefficient shape " + shape_string(c.shape()) + " vs " +
                                       std::to_string(grid.basis_count()) + " basis functions");
  }
  const int p = grid.degree();
  std::vector<BasisWindow> windows;
  windows.reserve(x.value().numel());
  std::vector<Scalar> out;
  out.reserve(x.value().numel());
  for (Scalar xi : x.value().data()) {
    windows.push_back(basis_window(xi, grid));
    const BasisWindow& w = windows.back();
    Scalar acc = 0;
    for (int a = 0; a <= p; ++a) acc += c[w.first + a] * w.values[a];
    out.push_back(acc);
  }
  return make_op("spline_curve", Tensor(x.shape(), std::move(out)), {coef, x},
                 [windows = std::move(windows), p](const Node& self, std::span<const Scalar> g, ParentGrads pg) {
                   const Tensor& c = self.parents()[0].value();
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     const BasisWindow& w = windows[i];
                     Scalar dx = 0;
                     for (int a = 0; a <= p; ++a) {
                       if (!pg[0].empty()) pg[0][w.first + a] += g[i] * w.values[a];
                       dx += c[w.first + a] * w.derivatives[a];
                     }
                     if (!pg[1].empty()) pg[1][i] += g[i] * dx;
                   }
                 });
}

std::vector<Scalar> fit_coef_lsq(std::span<const Scalar> xs, std::span<const Scalar> ys, const Grid& grid) {
  if (xs.size() != ys.size()) {
    fail(ErrorKind::ShapeMismatch, "fit_coef_lsq: " + std::to_string(xs.size()) + " x values vs " +
                                       std::to_string(ys.size()) + " y values");
  }
  const std::size_t nb = grid.basis_count();
  if (xs.size() < nb) {
    fail(ErrorKind::RankDeficient, std::to_string(xs.size()) + " samples cannot determine " + std::to_string(nb) +
                                       " coefficients");
  }
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(nb));
  Eigen::VectorXd target(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const BasisWindow w = basis_window(xs[i], grid);
    for (int a = 0; a <= grid.degree(); ++a) design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w.first + a)) = w.values[a];
    target(static_cast<Eigen::Index>(i)) = ys[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(nb)) {
    fail(ErrorKind::RankDeficient, "samples leave " + std::to_string(nb - static_cast<std::size_t>(qr.rank())) +
                                       " basis functions undetermined");
  }
  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().array() += 1e-8;
  const Eigen::LDLT<Eigen::MatrixXd> damped(normal);
  const Eigen::VectorXd rhs = design.transpose() * target;
  Eigen::VectorXd coef = damped.solve(rhs);
  // refinement against the undamped system removes the ridge bias
  for (int pass = 0; pass < 2; ++pass) coef += damped.solve(rhs - design.transpose() * (design * coef));
  return {coef.data(), coef.data() + coef.size()};
}

}  // namespace kanmcp::spline
