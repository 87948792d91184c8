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

#ifndef KANMCP_PARETO_HPP
#define KANMCP_PARETO_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kanmcp/autodiff.hpp"
#include "kanmcp/modality.hpp"

namespace kanmcp::pareto {

/// Flattened gradient of one parameter group with its cached norm.
struct FlatGrad {
  std::string group;
  std::vector<Scalar> values;
  Scalar norm = 0;

  FlatGrad() = default;
  FlatGrad(std::string group, std::vector<Scalar> values);
};

/// Norms below this count as zero throughout.
inline constexpr Scalar kTiny = 1e-12;

/// dot / (|g1| |g2|), or 0 when either norm is below kTiny.
Scalar cosine(const FlatGrad& g1, const FlatGrad& g2);

/// argmin over alpha in [0, 1] of |alpha g_m + (1 - alpha) g_u|^2, in closed
/// form. Returns 0.5 when |g_m - g_u| < kTiny. Throws BothZero.
Scalar min_norm_alpha(std::span<const Scalar> g_m, std::span<const Scalar> g_u);

/// Outcome of coordinating one multimodal/unimodal gradient pair.
struct ParetoDecision {
  Scalar cos_beta = 0;
  bool conflict = false;
  Scalar alpha_m = 0.5;
  Scalar alpha_u = 0.5;
  /// Magnitude-restoration factor; 1 outside the conflict case.
  Scalar lambda = 1;
  /// Conflict with a vanishing min-norm direction; fell back to the sum.
  bool degenerate = false;
  std::vector<Scalar> combined;
};

/// Aligned (cos >= 0): combined = g_m + g_u. Conflicting: the min-norm
/// direction d = 2 alpha_m g_m + 2 alpha_u g_u rescaled by
/// lambda = |g_m + g_u| / |d|.
ParetoDecision combine(const FlatGrad& g_m, const FlatGrad& g_u);

enum class GroupRole { Encoder, Head, Decoder };

/// A set of parameters whose gradients are flattened and combined together.
struct ParamGroup {
  std::string name;
  GroupRole role = GroupRole::Head;
  std::optional<Modality> modality;  // set for Encoder and Decoder groups
  std::vector<std::string> params;
};

struct GroupDecision {
  std::string group;
  Modality modality = Modality::Text;
  ParetoDecision decision;
};

enum class MergeMode {
  MCPareto,  // per-group combine()
  Sum,       // plain sum of the loss gradients
};

struct MergeResult {
  GradientMap merged;
  /// One record per encoder group, in layout order. Recorded in both modes.
  std::vector<GroupDecision> decisions;
};

/// Encoder groups of modality m get combine(multimodal, unimodal[m]); head
/// groups keep only the multimodal gradient; decoder groups keep only their
/// own unimodal gradient. Throws GroupMismatch when an encoder parameter is
/// missing from either source map or a map holds a parameter the layout does
/// not know.
MergeResult mcpareto_apply(std::span<const ParamGroup> layout, const GradientMap& multimodal,
                           const PerModality<GradientMap>& unimodal, MergeMode mode = MergeMode::MCPareto);

}  // namespace kanmcp::pareto

#endif  // KANMCP_PARETO_HPP
