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

#include "kanmcp/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kanmcp/error.hpp"

namespace kanmcp::pareto {

namespace {

Scalar dot(std::span<const Scalar> a, std::span<const Scalar> b) {
  Scalar acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Scalar norm(std::span<const Scalar> a) { return std::sqrt(dot(a, a)); }

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    fail(ErrorKind::LengthMismatch, "gradient lengths differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

FlatGrad::FlatGrad(std::string group_name, std::vector<Scalar> flat)
    : group(std::move(group_name)), values(std::move(flat)), norm(pareto::norm(values)) {}

Scalar cosine(const FlatGrad& g1, const FlatGrad& g2) {
  if (g1.group != g2.group) fail(ErrorKind::GroupMismatch, "cosine across groups '" + g1.group + "' and '" + g2.group + "'");
  check_lengths(g1.values.size(), g2.values.size());
  if (g1.norm < kTiny || g2.norm < kTiny) return 0;
  return std::clamp(dot(g1.values, g2.values) / (g1.norm * g2.norm), Scalar{-1}, Scalar{1});
}

Scalar min_norm_alpha(std::span<const Scalar> g_m, std::span<const Scalar> g_u) {
  check_lengths(g_m.size(), g_u.size());
  if (norm(g_m) == 0 && norm(g_u) == 0) fail(ErrorKind::BothZero, "both gradients are zero");
  Scalar num = 0;    // <g_u - g_m, g_u>
  Scalar denom = 0;  // |g_m - g_u|^2
  for (std::size_t i = 0; i < g_m.size(); ++i) {
    const Scalar diff = g_u[i] - g_m[i];
    num += diff * g_u[i];
    denom += diff * diff;
  }
  if (std::sqrt(denom) < kTiny) return 0.5;
  return std::clamp(num / denom, Scalar{0}, Scalar{1});
}

ParetoDecision combine(const FlatGrad& g_m, const FlatGrad& g_u) {
  ParetoDecision d;
  d.cos_beta = cosine(g_m, g_u);
  d.conflict = d.cos_beta < 0;
  const std::size_t n = g_m.values.size();
  d.combined.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.combined[i] = g_m.values[i] + g_u.values[i];
  if (!d.conflict) return d;

  d.alpha_m = min_norm_alpha(g_m.values, g_u.values);
  d.alpha_u = 1 - d.alpha_m;
  std::vector<Scalar> direction(n);
  for (std::size_t i = 0; i < n; ++i) {
    direction[i] = 2 * d.alpha_m * g_m.values[i] + 2 * d.alpha_u * g_u.values[i];
  }
  const Scalar direction_norm = norm(direction);
  if (direction_norm < kTiny) {
    d.degenerate = true;
    return d;
  }
  d.lambda = norm(d.combined) / direction_norm;
  for (std::size_t i = 0; i < n; ++i) d.combined[i] = d.lambda * direction[i];
  return d;
}

namespace {

std::vector<Scalar> flatten(const GradientMap& grads, const ParamGroup& group, const char* source) {
  std::vector<Scalar> flat;
  for (const std::string& name : group.params) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      fail(ErrorKind::GroupMismatch, "parameter '" + name + "' of group '" + group.name + "' missing from the " +
                                         source + " gradients");
    }
    flat.insert(flat.end(), it->second.data().begin(), it->second.data().end());
  }
  return flat;
}

void scatter(GradientMap& out, const GradientMap& like, const ParamGroup& group, std::span<const Scalar> flat) {
  std::size_t offset = 0;
  for (const std::string& name : group.params) {
    const Tensor& shape_of = like.at(name);
    std::vector<Scalar> part(flat.begin() + offset, flat.begin() + offset + shape_of.numel());
    offset += shape_of.numel();
    out.insert_or_assign(name, Tensor(shape_of.shape(), std::move(part)));
  }
}

void copy_present(GradientMap& out, const GradientMap& source, const ParamGroup& group) {
  for (const std::string& name : group.params) {
    auto it = source.find(name);
    if (it != source.end()) out.insert_or_assign(name, it->second);
  }
}

}  // namespace

MergeResult mcpareto_apply(std::span<const ParamGroup> layout, const GradientMap& multimodal,
                           const PerModality<GradientMap>& unimodal, MergeMode mode) {
  std::set<std::string> known;
  for (const ParamGroup& group : layout) known.insert(group.params.begin(), group.params.end());
  auto check_known = [&](const GradientMap& grads, const std::string& source) {
    for (const auto& [name, grad] : grads) {
      if (!known.count(name)) fail(ErrorKind::GroupMismatch, "parameter '" + name + "' in the " + source +
                                                                 " gradients belongs to no group");
    }
  };
  check_known(multimodal, "multimodal");
  for (Modality m : kModalities) check_known(unimodal[index_of(m)], std::string(long_name(m)) + " unimodal");

  MergeResult result;
  for (const ParamGroup& group : layout) {
    switch (group.role) {
      case GroupRole::Head:
        copy_present(result.merged, multimodal, group);
        break;
      case GroupRole::Decoder:
        copy_present(result.merged, unimodal[index_of(group.modality.value())], group);
        break;
      case GroupRole::Encoder: {
        const Modality m = group.modality.value();
        const GradientMap& uni = unimodal[index_of(m)];
        FlatGrad g_m(group.name, flatten(multimodal, group, "multimodal"));
        FlatGrad g_u(group.name, flatten(uni, group, "unimodal"));
        ParetoDecision decision = combine(g_m, g_u);
        if (mode == MergeMode::Sum) {
          for (std::size_t i = 0; i < g_m.values.size(); ++i) g_m.values[i] += g_u.values[i];
          scatter(result.merged, multimodal, group, g_m.values);
        } else {
          scatter(result.merged, multimodal, group, decision.combined);
        }
        result.decisions.push_back({group.name, m, std::move(decision)});
        break;
      }
    }
  }
  return result;
}

}  // namespace kanmcp::pareto
