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

#include "kanmcp/kv.hpp"

#include <charconv>
#include <set>

#include "kanmcp/format.hpp"

namespace kanmcp::kv {

std::string trim(std::string_view s) {
  const auto blank = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && blank(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<Entry> parse(std::string_view text, ErrorKind kind) {
  std::vector<Entry> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      fail(kind, "line " + std::to_string(line_no) + ": expected 'key = value', got '" + stripped + "'");
    }
    Entry e{trim(std::string_view(stripped).substr(0, eq)), trim(std::string_view(stripped).substr(eq + 1)), line_no};
    if (e.key.empty()) fail(kind, "line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(e.key).second) fail(kind, "line " + std::to_string(line_no) + ": duplicate key '" + e.key + "'");
    out.push_back(std::move(e));
  }
  return out;
}

double to_real(const Entry& e, ErrorKind kind) {
  double v = 0;
  if (!parse_real(e.value, v)) fail(kind, "field '" + e.key + "': '" + e.value + "' is not a number");
  return v;
}

std::uint64_t to_uint(const Entry& e, ErrorKind kind) {
  std::uint64_t v = 0;
  const char* end = e.value.data() + e.value.size();
  const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
  if (e.value.empty() || ec != std::errc{} || ptr != end) {
    fail(kind, "field '" + e.key + "': '" + e.value + "' is not a non-negative integer");
  }
  return v;
}

bool to_bool(const Entry& e, ErrorKind kind) {
  if (e.value == "on" || e.value == "true" || e.value == "1") return true;
  if (e.value == "off" || e.value == "false" || e.value == "0") return false;
  fail(kind, "field '" + e.key + "': '" + e.value + "' is not on/off");
}

std::vector<std::size_t> to_uint_list(const Entry& e, ErrorKind kind) {
  std::vector<std::size_t> out;
  std::string_view rest = e.value;
  while (true) {
    const std::size_t comma = rest.find(',');
    Entry part{e.key, trim(rest.substr(0, comma)), e.line};
    out.push_back(static_cast<std::size_t>(to_uint(part, kind)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

}  // namespace kanmcp::kv
