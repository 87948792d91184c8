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

#include "kanmcp/config.hpp"

#include <cmath>

#include "kanmcp/error.hpp"
#include "kanmcp/format.hpp"
#include "kanmcp/kv.hpp"

namespace kanmcp {

std::vector<std::size_t> RunConfig::head_widths() const {
  std::vector<std::size_t> widths{3 * code_dim};
  widths.insert(widths.end(), head_hidden.begin(), head_hidden.end());
  widths.push_back(1);
  return widths;
}

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  fail(ErrorKind::ConfigError, "field '" + field + "' " + why);
}

void positive_real(const std::string& field, Scalar v) {
  if (!(v > 0) || !std::isfinite(v)) bad(field, "must be > 0");
}

}  // namespace

void RunConfig::validate() const {
  if (!(beta >= 0) || !std::isfinite(beta)) bad("beta", "must be >= 0");
  if (code_dim == 0) bad("d_h", "must be >= 1");
  if (mid_dim == 0) bad("mid_dim", "must be >= 1");
  for (std::size_t h : head_hidden) {
    if (h == 0) bad("head_hidden", "entries must be >= 1");
  }
  if (grid.intervals == 0) bad("grid_size", "must be >= 1");
  if (grid.degree < 1 || grid.degree > spline::kMaxDegree) bad("spline_degree", "must lie in [1, 5]");
  if (!(grid.lo < grid.hi)) bad("grid_min", "must be < grid_max");
  if (batch_size == 0) bad("batch_size", "must be >= 1");
  if (epochs == 0) bad("epochs", "must be >= 1");
  positive_real("text_lr", text_lr);
  positive_real("other_lr", other_lr);
}

RunConfig parse_config(const std::string& text) {
  constexpr ErrorKind kErr = ErrorKind::ConfigError;
  RunConfig c;
  for (const kv::Entry& e : kv::parse(text, kErr)) {
    const std::string& k = e.key;
    if (k == "beta") {
      c.beta = kv::to_real(e, kErr);
    } else if (k == "d_h") {
      c.code_dim = kv::to_uint(e, kErr);
    } else if (k == "mid_dim") {
      c.mid_dim = kv::to_uint(e, kErr);
    } else if (k == "head_hidden") {
      c.head_hidden = e.value.empty() || e.value == "none" ? std::vector<std::size_t>{} : kv::to_uint_list(e, kErr);
    } else if (k == "grid_size") {
      c.grid.intervals = kv::to_uint(e, kErr);
    } else if (k == "spline_degree") {
      c.grid.degree = static_cast<int>(kv::to_uint(e, kErr));
    } else if (k == "grid_min") {
      c.grid.lo = kv::to_real(e, kErr);
    } else if (k == "grid_max") {
      c.grid.hi = kv::to_real(e, kErr);
    } else if (k == "batch_size") {
      c.batch_size = kv::to_uint(e, kErr);
    } else if (k == "epochs") {
      c.epochs = kv::to_uint(e, kErr);
    } else if (k == "text_lr") {
      c.text_lr = kv::to_real(e, kErr);
    } else if (k == "other_lr") {
      c.other_lr = kv::to_real(e, kErr);
    } else if (k == "seed") {
      c.seed = kv::to_uint(e, kErr);
    } else if (k == "mcpareto") {
      c.mcpareto = kv::to_bool(e, kErr);
    } else if (k == "grid_refit_every") {
      c.grid_refit_every = kv::to_uint(e, kErr);
    } else if (k == "data") {
      c.data = e.value;
    } else {
      fail(kErr, "line " + std::to_string(e.line) + ": unknown key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

std::string to_config_text(const RunConfig& c) {
  std::string hidden;
  for (std::size_t i = 0; i < c.head_hidden.size(); ++i) {
    if (i) hidden += ",";
    hidden += std::to_string(c.head_hidden[i]);
  }
  if (hidden.empty()) hidden = "none";
  std::string out;
  out += "beta = " + format_real(c.beta) + "\n";
  out += "d_h = " + std::to_string(c.code_dim) + "\n";
  out += "mid_dim = " + std::to_string(c.mid_dim) + "\n";
  out += "head_hidden = " + hidden + "\n";
  out += "grid_size = " + std::to_string(c.grid.intervals) + "\n";
  out += "spline_degree = " + std::to_string(c.grid.degree) + "\n";
  out += "grid_min = " + format_real(c.grid.lo) + "\n";
  out += "grid_max = " + format_real(c.grid.hi) + "\n";
  out += "batch_size = " + std::to_string(c.batch_size) + "\n";
  out += "epochs = " + std::to_string(c.epochs) + "\n";
  out += "text_lr = " + format_real(c.text_lr) + "\n";
  out += "other_lr = " + format_real(c.other_lr) + "\n";
  out += "seed = " + std::to_string(c.seed) + "\n";
  out += "mcpareto = " + std::string(c.mcpareto ? "on" : "off") + "\n";
  out += "grid_refit_every = " + std::to_string(c.grid_refit_every) + "\n";
  if (!c.data.empty()) out += "data = " + c.data + "\n";
  return out;
}

}  // namespace kanmcp
