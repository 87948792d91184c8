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

#ifndef KANMCP_TOOLS_CLI_HPP
#define KANMCP_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

#include "kanmcp/error.hpp"

namespace kanmcp::cli {

/// Process exit code for an error class: usage 2, config 3, data 4,
/// checkpoint 5, io 6, anything else 1.
int exit_code(ErrorKind kind);

/// Runs one command line (args[0] is the program name). Errors are
/// reported on `err` as a single "Kind: message" line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kanmcp::cli

#endif  // KANMCP_TOOLS_CLI_HPP
