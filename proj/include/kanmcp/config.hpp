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

#ifndef KANMCP_CONFIG_HPP
#define KANMCP_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kanmcp/kan.hpp"
#include "kanmcp/tensor.hpp"

namespace kanmcp {

/// Every hyperparameter of a run.
struct RunConfig {
  Scalar beta = 1e-3;
  std::size_t code_dim = 3;                  // d_h per modality
  std::size_t mid_dim = 64;                  // encoder hidden width
  std::vector<std::size_t> head_hidden{4};  // head widths are [3 * d_h, hidden..., 1]
  kan::GridSpec grid{};
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  Scalar text_lr = 1e-3;
  Scalar other_lr = 1e-3;
  std::uint64_t seed = 0;
  bool mcpareto = true;
  /// Refit the head grids to the observed input range every N epochs; 0
  /// disables it.
  std::size_t grid_refit_every = 0;
  /// Optional default data directory; the CLI flag overrides it.
  std::string data;

  std::vector<std::size_t> head_widths() const;

  /// Throws ConfigError naming the first offending field.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses "key = value" lines with '#' comments. Unknown keys, malformed
/// values and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& text);

/// Canonical text form; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

}  // namespace kanmcp

#endif  // KANMCP_CONFIG_HPP
