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

#ifndef KANMCP_DATA_HPP
#define KANMCP_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kanmcp/modality.hpp"
#include "kanmcp/tensor.hpp"

namespace kanmcp::data {

/// Row-major feature matrix. Unlike Tensor it may hold zero rows, so empty
/// splits are representable.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Scalar> values;

  std::span<const Scalar> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  Tensor tensor() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// Aligned per-modality features and regression labels in [-3, 3].
struct ModalityBatch {
  PerModality<FeatureMatrix> features;
  std::vector<Scalar> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  const FeatureMatrix& operator[](Modality m) const { return features[index_of(m)]; }
  FeatureMatrix& operator[](Modality m) { return features[index_of(m)]; }
  /// [batch, 1]
  Tensor label_tensor() const;
  ModalityBatch select(std::span<const std::size_t> indices) const;

  friend bool operator==(const ModalityBatch&, const ModalityBatch&) = default;
};

inline constexpr Scalar kLabelMin = -3;
inline constexpr Scalar kLabelMax = 3;

/// Throws RowCountMismatch or LabelOutOfRange.
void validate(const ModalityBatch& batch);

struct SplitDataset {
  ModalityBatch train;
  ModalityBatch val;
  ModalityBatch test;
};

/// Contiguous 70/10/20 split in row order.
SplitDataset split_70_10_20(const ModalityBatch& all);
ModalityBatch concat_rows(std::span<const ModalityBatch> parts);

enum class LabelFunction {
  Additive,      // y = s_t + s_a + s_v, each modality sees only its own part
  TextDominant,  // one latent; audio/visual SNR default to 0
  Balanced,      // one latent seen by every modality
};

struct SynthSpec {
  std::size_t n = 2000;
  PerModality<std::size_t> dims = {16, 16, 16};
  PerModality<Scalar> snr = {1, 1, 1};
  LabelFunction label = LabelFunction::Balanced;
  std::uint64_t seed = 0;
};

/// "key = value" lines (n, d_t, d_a, d_v, snr_t, snr_a, snr_v, label, seed)
/// with '#' comments. For label = text-dominant, snr_a and snr_v default to
/// 0 unless given. Throws BadSpec.
SynthSpec parse_synth_spec(const std::string& text);

/// Deterministic in `spec`. Latent s ~ U[-3, 3]; every feature is
/// snr_m * embed_m(s) + N(0, 1) noise. Split 70/10/20.
SplitDataset synth_generate(const SynthSpec& spec);

/// Writes text.csv, audio.csv, visual.csv, labels.csv and manifest; the
/// split is stored as contiguous row ranges. Creates the directory.
void write_features(const SplitDataset& dataset, const std::filesystem::path& dir);

/// All rows of a feature directory, validated against its manifest. Throws
/// MissingFile, RowCountMismatch, ParseError, LabelOutOfRange, BadSpec.
ModalityBatch load_features(const std::filesystem::path& dir);

/// load_features split by the manifest's n_train/n_val/n_test, or 70/10/20.
SplitDataset load_split(const std::filesystem::path& dir);

/// Row permutation keyed by (seed, epoch), cut into batches of `batch_size`
/// with the final partial batch kept.
std::vector<std::vector<std::size_t>> minibatch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                        std::uint64_t epoch);
std::vector<ModalityBatch> minibatches(const ModalityBatch& dataset, std::size_t batch_size, std::uint64_t seed,
                                       std::uint64_t epoch);

/// Per-column z-scoring with statistics from a reference (training) batch.
struct Standardizer {
  PerModality<std::vector<Scalar>> mean;
  PerModality<std::vector<Scalar>> stddev;

  static Standardizer fit(const ModalityBatch& reference);
  static Standardizer identity(const PerModality<std::size_t>& dims);
  void apply(ModalityBatch& batch) const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace kanmcp::data

#endif  // KANMCP_DATA_HPP
