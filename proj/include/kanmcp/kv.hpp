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

#ifndef KANMCP_KV_HPP
#define KANMCP_KV_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kanmcp/error.hpp"

namespace kanmcp::kv {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Parses flat "key = value" text. Blank lines and '#' comments are skipped;
/// duplicate keys and lines without '=' raise `kind`.
std::vector<Entry> parse(std::string_view text, ErrorKind kind);

std::string trim(std::string_view s);

/// Typed accessors raising `kind` with the key named in the message.
double to_real(const Entry& e, ErrorKind kind);
std::uint64_t to_uint(const Entry& e, ErrorKind kind);
bool to_bool(const Entry& e, ErrorKind kind);
std::vector<std::size_t> to_uint_list(const Entry& e, ErrorKind kind);

}  // namespace kanmcp::kv

#endif  // KANMCP_KV_HPP
