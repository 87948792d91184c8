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

#ifndef KANMCP_METRICS_HPP
#define KANMCP_METRICS_HPP

#include <span>
#include <string>

#include "kanmcp/tensor.hpp"

namespace kanmcp::metrics {

/// Sentiment-regression scores as percentages, plus raw-score MAE and
/// Pearson correlation.
struct MetricReport {
  Scalar acc7 = 0;
  Scalar acc5 = 0;
  Scalar acc3 = 0;
  Scalar acc2 = 0;
  Scalar f1 = 0;
  Scalar mae = 0;
  Scalar corr = 0;
  /// False when either argument had zero variance; corr is then 0.
  bool corr_defined = true;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Neutral band of the three-class accuracy.
inline constexpr Scalar kNeutralBand = 0.1;

/// k = 7: round (ties to even) and clamp to [-3, 3]; k = 5: clamp to
/// [-2, 2]; k = 3: sign with |v| < 0.1 neutral; k = 2: negative vs
/// non-negative over samples with non-zero labels.
Scalar acc_k(std::span<const Scalar> pred, std::span<const Scalar> truth, int k);

/// Support-weighted F1 of the two acc2 classes, as a percentage.
Scalar f1_binary(std::span<const Scalar> pred, std::span<const Scalar> truth);

Scalar mae(std::span<const Scalar> pred, std::span<const Scalar> truth);

struct Correlation {
  Scalar value = 0;
  bool defined = false;
};
Correlation pearson_corr(std::span<const Scalar> pred, std::span<const Scalar> truth);

/// Full report. Throws EmptyDataset on empty input.
MetricReport evaluate_scores(std::span<const Scalar> pred, std::span<const Scalar> truth);

/// "prefix.acc7=..." lines, one metric per line, 17 significant digits.
std::string to_key_value(const MetricReport& report, const std::string& prefix);

}  // namespace kanmcp::metrics

#endif  // KANMCP_METRICS_HPP
