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

#ifndef KANMCP_KAN_HPP
#define KANMCP_KAN_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kanmcp/autodiff.hpp"
#include "kanmcp/spline.hpp"

namespace kanmcp::kan {

struct GridSpec {
  std::size_t intervals = 5;
  int degree = 3;
  Scalar lo = -1;
  Scalar hi = 1;

  spline::Grid make() const { return spline::Grid::uniform(intervals, degree, lo, hi); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// One layer of learnable edge functions
///   phi_{q,p}(t) = w_b[q][p] * silu(t) + w_s[q][p] * sum_i c[q][p][i] B_i(t)
/// with out_q = sum_p phi_{q,p}(x_p).
class KanLayer {
 public:
  KanLayer() = default;
  /// All parameters start at zero.
  KanLayer(const std::string& name, std::size_t n_in, std::size_t n_out, spline::Grid grid);

  std::size_t n_in() const noexcept { return n_in_; }
  std::size_t n_out() const noexcept { return n_out_; }
  const spline::Grid& grid() const noexcept { return grid_; }

  /// [n_out, n_in, G+k]
  Parameter& coef() { return coef_; }
  const Parameter& coef() const { return coef_; }
  /// [n_out, n_in]
  Parameter& base_weight() { return base_weight_; }
  const Parameter& base_weight() const { return base_weight_; }
  /// [n_out, n_in]
  Parameter& spline_scale() { return spline_scale_; }
  const Parameter& spline_scale() const { return spline_scale_; }

  std::vector<Parameter*> parameters() { return {&coef_, &base_weight_, &spline_scale_}; }
  std::vector<const Parameter*> parameters() const { return {&coef_, &base_weight_, &spline_scale_}; }

  /// Scalar evaluation of one edge function, through the dense basis.
  Scalar edge(std::size_t q, std::size_t p, Scalar t) const;

  /// Replaces the knot grid; coefficients are left as they are.
  void set_grid(spline::Grid grid);

 private:
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  spline::Grid grid_ = spline::Grid::uniform(1, 1, -1, 1);
  Parameter coef_;
  Parameter base_weight_;
  Parameter spline_scale_;
};

/// x: [batch, n_in] -> [batch, n_out], differentiable in x and every layer
/// parameter.
Var kan_layer_forward(const KanLayer& layer, const Var& x);

class KanNetwork {
 public:
  KanNetwork() = default;
  explicit KanNetwork(std::vector<KanLayer> layers);

  const std::vector<KanLayer>& layers() const noexcept { return layers_; }
  std::vector<KanLayer>& layers() noexcept { return layers_; }
  std::vector<std::size_t> widths() const;
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

 private:
  std::vector<KanLayer> layers_;
};

/// Composition of the layers, first to last.
Var kan_forward(const KanNetwork& net, const Var& x);

/// w_b ~ U(-1/sqrt(n_in), 1/sqrt(n_in)), c ~ N(0, 0.1/(G+k)), w_s = 1.
/// Parameters are named "<prefix>.l<i>.{coef,base_weight,spline_scale}".
/// Throws BadWidths unless there are >= 2 positive widths.
KanNetwork init_kan(std::span<const std::size_t> widths, const GridSpec& grid, std::uint64_t seed,
                    const std::string& prefix = "kan");

/// Mean over a probe batch of |phi_{q,p}(x_p)| for one layer.
struct EdgeAttribution {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::vector<Scalar> values;  // row-major [n_out, n_in]

  Scalar at(std::size_t q, std::size_t p) const { return values[q * n_in + p]; }
};

/// Per-layer attributions for a probe batch [batch, n_0].
std::vector<EdgeAttribution> edge_attribution(const KanNetwork& net, const Tensor& probe);

/// Moves the layer grid to cover the observed input range and refits every
/// edge spline by least squares so the edge functions are preserved on
/// the old range.
void refit_grid(KanLayer& layer, const Tensor& inputs);

}  // namespace kanmcp::kan

#endif  // KANMCP_KAN_HPP
