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

#include "kanmcp/kan.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "kanmcp/error.hpp"
#include "kanmcp/rng.hpp"

namespace kanmcp::kan {

namespace {

Scalar sigmoid(Scalar t) { return Scalar{1} / (Scalar{1} + std::exp(-t)); }
Scalar silu_value(Scalar t) { return t * sigmoid(t); }
Scalar silu_grad(Scalar t) {
  const Scalar s = sigmoid(t);
  return s * (Scalar{1} + t * (Scalar{1} - s));
}

}  // namespace

KanLayer::KanLayer(const std::string& name, std::size_t n_in, std::size_t n_out, spline::Grid grid)
    : n_in_(n_in),
      n_out_(n_out),
      grid_(std::move(grid)),
      coef_(name + ".coef", Tensor::zeros({n_out, n_in, grid_.basis_count()})),
      base_weight_(name + ".base_weight", Tensor::zeros({n_out, n_in})),
      spline_scale_(name + ".spline_scale", Tensor::zeros({n_out, n_in})) {}

Scalar KanLayer::edge(std::size_t q, std::size_t p, Scalar t) const {
  const std::size_t nb = grid_.basis_count();
  const auto coef = coef_.value().data().subspan((q * n_in_ + p) * nb, nb);
  const std::vector<Scalar> basis = spline::bspline_basis(t, grid_);
  return base_weight_.value().at(q, p) * silu_value(t) +
         spline_scale_.value().at(q, p) * spline::spline_eval(coef, basis);
}

void KanLayer::set_grid(spline::Grid grid) {
  if (grid.basis_count() != grid_.basis_count()) {
    fail(ErrorKind::ShapeMismatch, "replacement grid changes the basis count");
  }
  grid_ = std::move(grid);
}

Var kan_layer_forward(const KanLayer& layer, const Var& x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2 || xv.cols() != layer.n_in()) {
    fail(ErrorKind::ShapeMismatch, "KAN layer expects [batch, " + std::to_string(layer.n_in()) + "], got " +
                                       shape_string(xv.shape()));
  }
  const std::size_t batch = xv.rows();
  const std::size_t n_in = layer.n_in();
  const std::size_t n_out = layer.n_out();
  const std::size_t nb = layer.grid().basis_count();
  const int deg = layer.grid().degree();
  const auto& coef = layer.coef().value().data();
  const auto& wb = layer.base_weight().value().data();
  const auto& ws = layer.spline_scale().value().data();

  struct Cache {
    std::vector<spline::BasisWindow> windows;  // [batch, n_in]
    std::vector<Scalar> spline_values;         // [batch, n_out, n_in]
  };
  auto cache = std::make_shared<Cache>();
  cache->windows.reserve(batch * n_in);
  for (Scalar t : xv.data()) cache->windows.push_back(spline::basis_window(t, layer.grid()));
  cache->spline_values.resize(batch * n_out * n_in);

  std::vector<Scalar> out(batch * n_out, Scalar{0});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t q = 0; q < n_out; ++q) {
      Scalar acc = 0;
      for (std::size_t p = 0; p < n_in; ++p) {
        const spline::BasisWindow& w = cache->windows[b * n_in + p];
        const Scalar* c = &coef[(q * n_in + p) * nb + w.first];
        Scalar s = 0;
        for (int a = 0; a <= deg; ++a) s += c[a] * w.values[a];
        cache->spline_values[(b * n_out + q) * n_in + p] = s;
        acc += wb[q * n_in + p] * silu_value(xv[b * n_in + p]) + ws[q * n_in + p] * s;
      }
      out[b * n_out + q] = acc;
    }
  }

  return make_op(
      "kan_layer", Tensor({batch, n_out}, std::move(out)),
      {x, layer.coef().var(), layer.base_weight().var(), layer.spline_scale().var()},
      [cache, batch, n_in, n_out, nb, deg](const Node& self, std::span<const Scalar> g, ParentGrads pg) {
        const auto& xd = self.parents()[0].value().data();
        const auto& c = self.parents()[1].value().data();
        const auto& wbd = self.parents()[2].value().data();
        const auto& wsd = self.parents()[3].value().data();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t p = 0; p < n_in; ++p) {
            const spline::BasisWindow& w = cache->windows[b * n_in + p];
            const Scalar t = xd[b * n_in + p];
            const Scalar sv = silu_value(t);
            const Scalar sd = silu_grad(t);
            Scalar dx = 0;
            for (std::size_t q = 0; q < n_out; ++q) {
              const Scalar gq = g[b * n_out + q];
              const std::size_t e = q * n_in + p;
              const std::size_t base = e * nb + w.first;
              if (!pg[0].empty()) {
                Scalar ds = 0;
                for (int a = 0; a <= deg; ++a) ds += c[base + a] * w.derivatives[a];
                dx += gq * (wbd[e] * sd + wsd[e] * ds);
              }
              if (!pg[1].empty()) {
                for (int a = 0; a <= deg; ++a) pg[1][base + a] += gq * wsd[e] * w.values[a];
              }
              if (!pg[2].empty()) pg[2][e] += gq * sv;
              if (!pg[3].empty()) pg[3][e] += gq * cache->spline_values[(b * n_out + q) * n_in + p];
            }
            if (!pg[0].empty()) pg[0][b * n_in + p] += dx;
          }
        }
      });
}

KanNetwork::KanNetwork(std::vector<KanLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i - 1].n_out() != layers_[i].n_in()) {
      fail(ErrorKind::BadWidths, "layer " + std::to_string(i - 1) + " outputs " +
                                     std::to_string(layers_[i - 1].n_out()) + " but layer " + std::to_string(i) +
                                     " takes " + std::to_string(layers_[i].n_in()));
    }
  }
}

std::vector<std::size_t> KanNetwork::widths() const {
  std::vector<std::size_t> w;
  if (layers_.empty()) return w;
  w.push_back(layers_.front().n_in());
  for (const KanLayer& l : layers_) w.push_back(l.n_out());
  return w;
}

std::vector<Parameter*> KanNetwork::parameters() {
  std::vector<Parameter*> out;
  for (KanLayer& l : layers_) {
    for (Parameter* p : l.parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> KanNetwork::parameters() const {
  std::vector<const Parameter*> out;
  for (const KanLayer& l : layers_) {
    for (const Parameter* p : l.parameters()) out.push_back(p);
  }
  return out;
}

std::size_t KanNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->numel();
  return n;
}

Var kan_forward(const KanNetwork& net, const Var& x) {
  Var h = x;
  for (const KanLayer& layer : net.layers()) h = kan_layer_forward(layer, h);
  return h;
}

KanNetwork init_kan(std::span<const std::size_t> widths, const GridSpec& grid_spec, std::uint64_t seed,
                    const std::string& prefix) {
  if (widths.size() < 2) fail(ErrorKind::BadWidths, "a KAN needs at least an input and an output width");
  if (std::find(widths.begin(), widths.end(), std::size_t{0}) != widths.end()) {
    fail(ErrorKind::BadWidths, "KAN widths must be positive");
  }
  const spline::Grid grid = grid_spec.make();
  const Scalar coef_std = Scalar(0.1) / static_cast<Scalar>(grid.basis_count());
  Rng rng(seed);
  std::vector<KanLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    KanLayer layer(prefix + ".l" + std::to_string(l), widths[l], widths[l + 1], grid);
    const Scalar bound = Scalar{1} / std::sqrt(static_cast<Scalar>(widths[l]));
    for (Scalar& w : layer.base_weight().mutable_data()) w = static_cast<Scalar>(rng.uniform(-bound, bound));
    for (Scalar& c : layer.coef().mutable_data()) c = static_cast<Scalar>(rng.normal(0, coef_std));
    for (Scalar& s : layer.spline_scale().mutable_data()) s = 1;
    layers.push_back(std::move(layer));
  }
  return KanNetwork(std::move(layers));
}

std::vector<EdgeAttribution> edge_attribution(const KanNetwork& net, const Tensor& probe) {
  if (probe.rank() != 2 || probe.numel() == 0) fail(ErrorKind::EmptyProbe, "attribution needs a [batch, n_0] probe");
  if (net.layers().empty() || probe.cols() != net.layers().front().n_in()) {
    fail(ErrorKind::ShapeMismatch, "probe shape " + shape_string(probe.shape()) + " does not match the network input");
  }
  std::vector<EdgeAttribution> out;
  const std::size_t batch = probe.rows();
  std::vector<Scalar> x(probe.data().begin(), probe.data().end());
  for (const KanLayer& layer : net.layers()) {
    EdgeAttribution attr{layer.n_in(), layer.n_out(), std::vector<Scalar>(layer.n_in() * layer.n_out(), 0)};
    std::vector<Scalar> next(batch * layer.n_out(), 0);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t q = 0; q < layer.n_out(); ++q) {
        for (std::size_t p = 0; p < layer.n_in(); ++p) {
          const Scalar phi = layer.edge(q, p, x[b * layer.n_in() + p]);
          attr.values[q * layer.n_in() + p] += std::abs(phi);
          next[b * layer.n_out() + q] += phi;
        }
      }
    }
    for (Scalar& v : attr.values) v /= static_cast<Scalar>(batch);
    out.push_back(std::move(attr));
    x = std::move(next);
  }
  return out;
}

void refit_grid(KanLayer& layer, const Tensor& inputs) {
  if (inputs.rank() != 2 || inputs.cols() != layer.n_in()) {
    fail(ErrorKind::ShapeMismatch, "refit_grid inputs " + shape_string(inputs.shape()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(inputs.data().begin(), inputs.data().end());
  Scalar lo = *lo_it;
  Scalar hi = *hi_it;
  if (!(hi - lo > Scalar(1e-6))) return;
  const Scalar margin = Scalar(0.01) * (hi - lo);
  lo -= margin;
  hi += margin;

  const spline::Grid old_grid = layer.grid();
  const spline::Grid new_grid = spline::Grid::uniform(old_grid.intervals(), old_grid.degree(), lo, hi);
  const std::size_t nb = old_grid.basis_count();
  constexpr std::size_t kSamples = 64;
  std::vector<Scalar> xs(kSamples);
  for (std::size_t i = 0; i < kSamples; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<Scalar>(i) / static_cast<Scalar>(kSamples - 1);
  }
  std::vector<std::vector<Scalar>> old_basis;
  for (Scalar t : xs) old_basis.push_back(spline::bspline_basis(t, old_grid));

  auto coef = layer.coef().mutable_data();
  std::vector<Scalar> ys(kSamples);
  for (std::size_t e = 0; e < layer.n_in() * layer.n_out(); ++e) {
    const std::span<Scalar> c = coef.subspan(e * nb, nb);
    for (std::size_t i = 0; i < kSamples; ++i) ys[i] = spline::spline_eval(c, old_basis[i]);
    const std::vector<Scalar> refit = spline::fit_coef_lsq(xs, ys, new_grid);
    std::copy(refit.begin(), refit.end(), c.begin());
  }
  layer.set_grid(new_grid);
}

}  // namespace kanmcp::kan
