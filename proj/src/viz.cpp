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

#include "kanmcp/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "kanmcp/error.hpp"
#include "kanmcp/format.hpp"

namespace kanmcp::viz {

namespace {

std::string num(double v) {
  std::string s = format_fixed(v, 2);
  if (s == "-0.00") s = "0.00";
  return s;
}

void check_shapes(const kan::KanNetwork& net, std::span<const kan::EdgeAttribution> attr) {
  const auto& layers = net.layers();
  if (attr.size() != layers.size()) {
    fail(ErrorKind::AttributionShapeMismatch, std::to_string(attr.size()) + " attribution layers for a " +
                                                  std::to_string(layers.size()) + "-layer network");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (attr[l].n_in != layers[l].n_in() || attr[l].n_out != layers[l].n_out() ||
        attr[l].values.size() != attr[l].n_in * attr[l].n_out) {
      fail(ErrorKind::AttributionShapeMismatch, "layer " + std::to_string(l) + " attribution is " +
                                                    std::to_string(attr[l].n_out) + "x" + std::to_string(attr[l].n_in));
    }
  }
}

}  // namespace

Scalar opacity(Scalar a, Scalar max_a, const RenderSpec& spec) {
  if (!(max_a > 0)) return spec.min_opacity;
  return std::clamp(a / max_a, spec.min_opacity, Scalar{1});
}

std::string render_svg(const kan::KanNetwork& net, std::span<const kan::EdgeAttribution> attr,
                       const RenderSpec& spec) {
  check_shapes(net, attr);
  const std::vector<std::size_t> widths = net.widths();
  const std::size_t tallest = *std::max_element(widths.begin(), widths.end());
  const double width = 2 * spec.margin + spec.layer_spacing * static_cast<double>(widths.size() - 1);
  const double height = 2 * spec.margin + spec.node_spacing * static_cast<double>(tallest - 1);
  const auto x_of = [&](std::size_t layer) { return spec.margin + spec.layer_spacing * static_cast<double>(layer); };
  const auto y_of = [&](std::size_t layer, std::size_t i) {
    const double offset = static_cast<double>(tallest - widths[layer]) / 2;
    return spec.margin + spec.node_spacing * (offset + static_cast<double>(i));
  };

  Scalar max_a = 0;
  for (const auto& a : attr) {
    for (Scalar v : a.values) max_a = std::max(max_a, v);
  }

  std::vector<std::vector<Scalar>> node_opacity(widths.size());
  for (std::size_t l = 0; l < widths.size(); ++l) node_opacity[l].assign(widths[l], 0);
  std::string edges;
  for (std::size_t l = 0; l < attr.size(); ++l) {
    for (std::size_t q = 0; q < attr[l].n_out; ++q) {
      for (std::size_t p = 0; p < attr[l].n_in; ++p) {
        const Scalar o = opacity(attr[l].at(q, p), max_a, spec);
        node_opacity[l][p] = std::max(node_opacity[l][p], o);
        node_opacity[l + 1][q] = std::max(node_opacity[l + 1][q], o);
        edges += "  <line class=\"edge\" data-layer=\"" + std::to_string(l) + "\" data-from=\"" + std::to_string(p) +
                 "\" data-to=\"" + std::to_string(q) + "\" x1=\"" + num(x_of(l)) + "\" y1=\"" + num(y_of(l, p)) +
                 "\" x2=\"" + num(x_of(l + 1)) + "\" y2=\"" + num(y_of(l + 1, q)) + "\" stroke=\"" + spec.edge_color +
                 "\" stroke-width=\"2\" stroke-opacity=\"" + format_real(o) + "\"/>\n";
      }
    }
  }

  const bool blocks = widths.front() % 3 == 0;
  const std::size_t block = widths.front() / 3;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  out += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (blocks) {
    for (std::size_t b = 0; b < 3; ++b) {
      const double top = y_of(0, b * block) - spec.node_radius - 4;
      const double bottom = y_of(0, (b + 1) * block - 1) + spec.node_radius + 4;
      out += "  <rect class=\"block\" data-block=\"" + spec.block_labels[b] + "\" x=\"" +
             num(x_of(0) - spec.node_radius - 6) + "\" y=\"" + num(top) + "\" width=\"" +
             num(2 * spec.node_radius + 12) + "\" height=\"" + num(bottom - top) + "\" fill=\"none\" stroke=\"" +
             spec.block_colors[b] + "\"/>\n";
      out += "  <text x=\"" + num(x_of(0) - spec.node_radius - 14) + "\" y=\"" + num((top + bottom) / 2 + 5) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"14\" fill=\"" + spec.block_colors[b] +
             "\">" + spec.block_labels[b] + "</text>\n";
    }
  }
  out += edges;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    for (std::size_t i = 0; i < widths[l]; ++i) {
      const std::string color = l == 0 && blocks ? spec.block_colors[i / block] : spec.edge_color;
      out += "  <circle class=\"node\" data-layer=\"" + std::to_string(l) + "\" data-index=\"" + std::to_string(i) +
             "\" cx=\"" + num(x_of(l)) + "\" cy=\"" + num(y_of(l, i)) + "\" r=\"" + num(spec.node_radius) +
             "\" fill=\"" + color + "\" fill-opacity=\"" + format_real(node_opacity[l][i]) + "\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render_dot(const kan::KanNetwork& net, std::span<const kan::EdgeAttribution> attr) {
  check_shapes(net, attr);
  const std::vector<std::size_t> widths = net.widths();
  std::string out = "digraph kan {\n  rankdir=LR;\n";
  for (std::size_t l = 0; l < widths.size(); ++l) {
    for (std::size_t i = 0; i < widths[l]; ++i) {
      out += "  l" + std::to_string(l) + "n" + std::to_string(i) + ";\n";
    }
  }
  for (std::size_t l = 0; l < attr.size(); ++l) {
    for (std::size_t q = 0; q < attr[l].n_out; ++q) {
      for (std::size_t p = 0; p < attr[l].n_in; ++p) {
        out += "  l" + std::to_string(l) + "n" + std::to_string(p) + " -> l" + std::to_string(l + 1) + "n" +
               std::to_string(q) + " [weight=" + format_real(attr[l].at(q, p)) + "];\n";
      }
    }
  }
  out += "}\n";
  return out;
}

namespace {

struct Frame {
  double left = 70, right = 150, top = 40, bottom = 50, width = 640, height = 360;
  double lo = 0, hi = 1;
  std::size_t count = 1;

  double x(std::size_t i) const {
    const double span = count > 1 ? static_cast<double>(count - 1) : 1;
    return left + (width - left - right) * static_cast<double>(i) / span;
  }
  double y(double v) const { return top + (height - top - bottom) * (hi - v) / (hi - lo); }
};

std::string polyline(const Frame& f, std::span<const Scalar> values, const std::string& name,
                     const std::string& color) {
  std::string pts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) pts += " ";
    pts += num(f.x(i)) + "," + num(f.y(values[i]));
  }
  return "  <polyline class=\"series\" data-series=\"" + name + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
}

void set_range(Frame& f, Scalar lo, Scalar hi) {
  if (hi - lo < 1e-12 * std::max<Scalar>(1, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  f.lo = lo;
  f.hi = hi;
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string out;
  const double x0 = f.left, x1 = f.width - f.right, y0 = f.top, y1 = f.height - f.bottom;
  out += "  <line class=\"axis\" x1=\"" + num(x0) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x1) + "\" y2=\"" +
         num(y1) + "\" stroke=\"black\"/>\n";
  out += "  <line class=\"axis\" x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" +
         num(y1) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = f.lo + (f.hi - f.lo) * k / 4;
    out += "  <text x=\"" + num(x0 - 6) + "\" y=\"" + num(f.y(v) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + format_fixed(v, 3) + "</text>\n";
  }
  out += "  <text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(f.height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label + "</text>\n";
  out += "  <text x=\"14\" y=\"" + num((y0 + y1) / 2) + "\" font-family=\"sans-serif\" font-size=\"12\">" + y_label +
         "</text>\n";
  return out;
}

std::string svg_open(const Frame& f) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "width=\"" + num(f.width) + "\" height=\"" + num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + " " +
         num(f.height) + "\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string plot_loss_curves(const model::LossHistory& history) {
  const std::size_t n = history.epochs();
  if (n == 0) fail(ErrorKind::EmptyHistory, "no epochs recorded");
  for (const auto& u : history.unimodal) {
    if (u.size() != n) fail(ErrorKind::EmptyHistory, "unimodal history length differs from the multimodal one");
  }
  const std::array<std::span<const Scalar>, 4> series = {history.multi, history.unimodal[0], history.unimodal[1],
                                                         history.unimodal[2]};
  const std::array<std::string, 4> names = {"multi", "t", "a", "v"};
  const std::array<std::string, 4> colors = {"#000000", "#1f77b4", "#d62728", "#2ca02c"};

  Frame f;
  f.count = n;
  Scalar lo = series[0][0], hi = series[0][0];
  for (const auto& s : series) {
    for (Scalar v : s) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  set_range(f, lo, hi);

  std::string out = svg_open(f);
  out += axes(f, "epoch", "loss");
  const std::size_t step = (n + 9) / 10;
  for (std::size_t i = 0; i < n; i += step) {
    const double x = f.x(i);
    const double y = f.height - f.bottom;
    out += "  <line class=\"tick\" x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(y + 5) + "\" stroke=\"black\"/>\n";
    out += "  <text class=\"tick-label\" x=\"" + num(x) + "\" y=\"" + num(y + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(i + 1) +
           "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) out += polyline(f, series[s], names[s], colors[s]);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double x = f.width - f.right + 20;
    const double y = f.top + 10 + 20 * static_cast<double>(s);
    out += "  <g class=\"legend\" data-series=\"" + names[s] + "\"><line x1=\"" + num(x) + "\" y1=\"" + num(y) +
           "\" x2=\"" + num(x + 24) + "\" y2=\"" + num(y) + "\" stroke=\"" + colors[s] +
           "\" stroke-width=\"2\"/><text x=\"" + num(x + 30) + "\" y=\"" + num(y + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + names[s] + "</text></g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_edge_function(const kan::KanLayer& layer, std::size_t q, std::size_t p, std::size_t samples) {
  if (q >= layer.n_out() || p >= layer.n_in()) {
    fail(ErrorKind::ShapeMismatch, "edge (" + std::to_string(q) + ", " + std::to_string(p) + ") is out of range");
  }
  if (samples < 2) fail(ErrorKind::DomainError, "need at least 2 samples");
  const Scalar t0 = layer.grid().t_min(), t1 = layer.grid().t_max();
  std::vector<Scalar> ts(samples), ys(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    ts[i] = t0 + (t1 - t0) * static_cast<Scalar>(i) / static_cast<Scalar>(samples - 1);
    ys[i] = layer.edge(q, p, ts[i]);
  }
  Frame f;
  f.right = 30;
  f.count = samples;
  set_range(f, *std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end()));
  std::string out = svg_open(f);
  out += axes(f, "t in [" + format_fixed(t0, 3) + ", " + format_fixed(t1, 3) + "]",
              "phi[" + std::to_string(q) + "][" + std::to_string(p) + "]");
  out += polyline(f, ys, "phi", "#1f77b4");
  out += "</svg>\n";
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) fail(ErrorKind::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace kanmcp::viz
