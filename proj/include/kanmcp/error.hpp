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

#ifndef KANMCP_ERROR_HPP
#define KANMCP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace kanmcp {

/// Every failure raised by the library carries one of these classes. The
/// CLI prints the class name as a machine-parsable prefix.
enum class ErrorKind {
  ShapeMismatch,
  NonFiniteInput,
  DomainError,
  NonScalarLoss,
  CycleDetected,
  NonDeterministicGraph,
  DegenerateGrid,
  RankDeficient,
  BadWidths,
  EmptyProbe,
  MissingModality,
  BothZero,
  LengthMismatch,
  GroupMismatch,
  EmptySequence,
  EmptyDataset,
  CorruptCheckpoint,
  BadSpec,
  MissingFile,
  RowCountMismatch,
  ParseError,
  LabelOutOfRange,
  NoNonzeroLabels,
  IoError,
  AttributionShapeMismatch,
  EmptyHistory,
  ConfigError,
  UsageError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NonScalarLoss: return "NonScalarLoss";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::NonDeterministicGraph: return "NonDeterministicGraph";
    case ErrorKind::DegenerateGrid: return "DegenerateGrid";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::BadWidths: return "BadWidths";
    case ErrorKind::EmptyProbe: return "EmptyProbe";
    case ErrorKind::MissingModality: return "MissingModality";
    case ErrorKind::BothZero: return "BothZero";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::GroupMismatch: return "GroupMismatch";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::RowCountMismatch: return "RowCountMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::NoNonzeroLabels: return "NoNonzeroLabels";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::AttributionShapeMismatch: return "AttributionShapeMismatch";
    case ErrorKind::EmptyHistory: return "EmptyHistory";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// "<Kind>: <message>", single line.
  std::string describe() const {
    return std::string(to_string(kind_)) + ": " + what();
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace kanmcp

#endif  // KANMCP_ERROR_HPP
