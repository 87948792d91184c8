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

#ifndef KANMCP_MODALITY_HPP
#define KANMCP_MODALITY_HPP

#include <array>
#include <cstddef>
#include <string_view>

namespace kanmcp {

enum class Modality : std::size_t { Text = 0, Audio = 1, Visual = 2 };

inline constexpr std::size_t kNumModalities = 3;
inline constexpr std::array<Modality, kNumModalities> kModalities = {Modality::Text, Modality::Audio,
                                                                    Modality::Visual};

constexpr std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }

/// Short tag used in parameter names, file names and logs: t, a, v.
constexpr std::string_view tag(Modality m) {
  switch (m) {
    case Modality::Text: return "t";
    case Modality::Audio: return "a";
    case Modality::Visual: return "v";
  }
  return "?";
}

constexpr std::string_view long_name(Modality m) {
  switch (m) {
    case Modality::Text: return "text";
    case Modality::Audio: return "audio";
    case Modality::Visual: return "visual";
  }
  return "?";
}

/// One value per modality, indexed by Modality.
template <typename T>
using PerModality = std::array<T, kNumModalities>;

}  // namespace kanmcp

#endif  // KANMCP_MODALITY_HPP
