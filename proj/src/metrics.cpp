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

#include "kanmcp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "kanmcp/error.hpp"
#include "kanmcp/format.hpp"

namespace kanmcp::metrics {

namespace {

void check_lengths(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::LengthMismatch, "metric inputs differ in length: " + std::to_string(a.size()) + " vs " +
                                        std::to_string(b.size()));
  }
}

// std::nearbyint honours the default rounding mode (ties to even).
int class_of(Scalar v, int k) {
  switch (k) {
    case 7: return static_cast<int>(std::nearbyint(std::clamp(v, Scalar{-3}, Scalar{3})));
    case 5: return static_cast<int>(std::nearbyint(std::clamp(v, Scalar{-2}, Scalar{2})));
    case 3: return std::abs(v) < kNeutralBand ? 0 : (v > 0 ? 1 : -1);
    case 2: return v >= 0 ? 1 : 0;
    default: fail(ErrorKind::DomainError, "acc_k supports k in {2, 3, 5, 7}, got " + std::to_string(k));
  }
}

}  // namespace

Scalar acc_k(std::span<const Scalar> pred, std::span<const Scalar> truth, int k) {
  check_lengths(pred, truth);
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (k == 2 && truth[i] == 0) continue;
    ++total;
    if (class_of(pred[i], k) == class_of(truth[i], k)) ++hits;
  }
  if (total == 0) {
    if (k == 2) fail(ErrorKind::NoNonzeroLabels, "binary accuracy needs at least one non-zero label");
    fail(ErrorKind::EmptyDataset, "accuracy of an empty set");
  }
  return Scalar{100} * static_cast<Scalar>(hits) / static_cast<Scalar>(total);
}

Scalar f1_binary(std::span<const Scalar> pred, std::span<const Scalar> truth) {
  check_lengths(pred, truth);
  // confusion[true class][predicted class]
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0) continue;
    ++confusion[class_of(truth[i], 2)][class_of(pred[i], 2)];
  }
  const std::size_t total = confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
  if (total == 0) fail(ErrorKind::NoNonzeroLabels, "F1 needs at least one non-zero label");

  Scalar weighted = 0;
  for (int c = 0; c < 2; ++c) {
    const std::size_t tp = confusion[c][c];
    const std::size_t support = confusion[c][0] + confusion[c][1];
    const std::size_t predicted = confusion[0][c] + confusion[1][c];
    const Scalar precision = predicted ? static_cast<Scalar>(tp) / static_cast<Scalar>(predicted) : 0;
    const Scalar recall = support ? static_cast<Scalar>(tp) / static_cast<Scalar>(support) : 0;
    const Scalar f1 = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0;
    weighted += f1 * static_cast<Scalar>(support);
  }
  return Scalar{100} * weighted / static_cast<Scalar>(total);
}

Scalar mae(std::span<const Scalar> pred, std::span<const Scalar> truth) {
  check_lengths(pred, truth);
  if (pred.empty()) fail(ErrorKind::EmptyDataset, "MAE of an empty set");
  Scalar acc = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
  return acc / static_cast<Scalar>(pred.size());
}

Correlation pearson_corr(std::span<const Scalar> pred, std::span<const Scalar> truth) {
  check_lengths(pred, truth);
  const std::size_t n = pred.size();
  if (n < 2) return {};
  Scalar mp = 0, mt = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += pred[i];
    mt += truth[i];
  }
  mp /= static_cast<Scalar>(n);
  mt /= static_cast<Scalar>(n);
  Scalar sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar dx = pred[i] - mp;
    const Scalar dy = truth[i] - mt;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) return {};
  return {std::clamp(sxy / std::sqrt(sxx * syy), Scalar{-1}, Scalar{1}), true};
}

MetricReport evaluate_scores(std::span<const Scalar> pred, std::span<const Scalar> truth) {
  check_lengths(pred, truth);
  if (pred.empty()) fail(ErrorKind::EmptyDataset, "cannot evaluate an empty set");
  MetricReport r;
  r.acc7 = acc_k(pred, truth, 7);
  r.acc5 = acc_k(pred, truth, 5);
  r.acc3 = acc_k(pred, truth, 3);
  r.acc2 = acc_k(pred, truth, 2);
  r.f1 = f1_binary(pred, truth);
  r.mae = mae(pred, truth);
  const Correlation c = pearson_corr(pred, truth);
  r.corr = c.value;
  r.corr_defined = c.defined;
  return r;
}

std::string to_key_value(const MetricReport& report, const std::string& prefix) {
  const std::string p = prefix.empty() ? "" : prefix + ".";
  std::string out;
  out += p + "acc7=" + format_real(report.acc7) + "\n";
  out += p + "acc5=" + format_real(report.acc5) + "\n";
  out += p + "acc3=" + format_real(report.acc3) + "\n";
  out += p + "acc2=" + format_real(report.acc2) + "\n";
  out += p + "f1=" + format_real(report.f1) + "\n";
  out += p + "mae=" + format_real(report.mae) + "\n";
  out += p + "corr=" + format_real(report.corr) + "\n";
  out += p + "corr_defined=" + std::string(report.corr_defined ? "1" : "0") + "\n";
  return out;
}

}  // namespace kanmcp::metrics
