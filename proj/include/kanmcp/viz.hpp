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

#ifndef KANMCP_VIZ_HPP
#define KANMCP_VIZ_HPP

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kanmcp/kan.hpp"
#include "kanmcp/model.hpp"

namespace kanmcp::viz {

struct RenderSpec {
  Scalar min_opacity = 0.05;
  Scalar layer_spacing = 220;
  Scalar node_spacing = 36;
  Scalar node_radius = 9;
  Scalar margin = 60;
  /// Input block labels and colors, text/audio/visual.
  std::array<std::string, 3> block_labels = {"t", "a", "v"};
  std::array<std::string, 3> block_colors = {"#1f77b4", "#d62728", "#2ca02c"};
  std::string edge_color = "#222222";
};

/// clamp(a / max_a, min_opacity, 1); min_opacity when max_a is 0.
Scalar opacity(Scalar a, Scalar max_a, const RenderSpec& spec);

/// Transparency-coded network diagram. Edges are
///   <line class="edge" data-layer=".." data-from=".." data-to=".." stroke-opacity=".."/>
/// and nodes <circle class="node" data-layer=".." data-index=".." fill-opacity=".."/>,
/// normalized by the largest attribution in the diagram. When the input
/// width is a multiple of 3 the input nodes form t/a/v blocks. Throws
/// AttributionShapeMismatch.
std::string render_svg(const kan::KanNetwork& net, std::span<const kan::EdgeAttribution> attributions,
                       const RenderSpec& spec = {});

/// Graphviz digraph with nodes l{layer}n{index} and one
/// "weight=<attribution>" edge attribute per edge.
std::string render_dot(const kan::KanNetwork& net, std::span<const kan::EdgeAttribution> attributions);

/// Four polylines (multi, t, a, v) over the epochs with a legend and
/// epoch ticks; larger losses sit higher. Throws EmptyHistory.
std::string plot_loss_curves(const model::LossHistory& history);

/// phi_{q,p} sampled at `samples` evenly spaced points of the grid range.
std::string render_edge_function(const kan::KanLayer& layer, std::size_t q, std::size_t p, std::size_t samples = 64);

/// Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kanmcp::viz

#endif  // KANMCP_VIZ_HPP
