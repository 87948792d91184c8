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

#ifndef KANMCP_CHECKPOINT_HPP
#define KANMCP_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "kanmcp/model.hpp"

namespace kanmcp::checkpoint {

inline constexpr char kMagic[4] = {'K', 'M', 'C', 'P'};
inline constexpr std::uint16_t kVersion = 1;

/// Binary image of a training state:
///
///   "KMCP" | u16 version | section* | u32 crc32
///   section = 4-byte tag | u64 payload length | payload
///
/// All integers little-endian, all reals IEEE-754 f64. Sections are CONF
/// (config text), DIMS, one PGRP per parameter group (values and Adam
/// moments), GRID (head knots), STAT (standardization), OPTM, RNGS, HIST
/// and FRZN. The CRC covers every preceding byte.
std::string serialize(const model::TrainState& state);

/// Throws CorruptCheckpoint on a bad magic, an unknown version, a CRC
/// mismatch, truncation, or inconsistent sections.
model::TrainState deserialize(const std::string& bytes);

/// Throws IoError when the file cannot be written.
void save(const model::TrainState& state, const std::filesystem::path& path);

/// Throws MissingFile or CorruptCheckpoint.
model::TrainState load(const std::filesystem::path& path);

}  // namespace kanmcp::checkpoint

#endif  // KANMCP_CHECKPOINT_HPP
