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

#ifndef KANMCP_FORMAT_HPP
#define KANMCP_FORMAT_HPP

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "kanmcp/error.hpp"
#include "kanmcp/tensor.hpp"

namespace kanmcp {

/// Round-trippable decimal text (17 significant digits).
inline std::string format_real(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Fixed-point text for rendered output.
inline std::string format_fixed(double v, int digits) {
  char buf[64];
  if (v == 0) v = 0;  // no "-0.000"
  const int n = std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// False unless the whole token (surrounding blanks aside) parses.
inline bool parse_real(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace kanmcp

#endif  // KANMCP_FORMAT_HPP
