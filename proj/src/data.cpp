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

#include "kanmcp/data.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "kanmcp/error.hpp"
#include "kanmcp/format.hpp"
#include "kanmcp/kv.hpp"
#include "kanmcp/rng.hpp"

namespace kanmcp::data {

namespace fs = std::filesystem;

Tensor FeatureMatrix::tensor() const {
  if (rows == 0) fail(ErrorKind::EmptyDataset, "feature matrix has no rows");
  return Tensor({rows, cols}, values);
}

Tensor ModalityBatch::label_tensor() const {
  if (labels.empty()) fail(ErrorKind::EmptyDataset, "batch has no labels");
  return Tensor({labels.size(), 1}, labels);
}

ModalityBatch ModalityBatch::select(std::span<const std::size_t> indices) const {
  ModalityBatch out;
  for (Modality m : kModalities) {
    const FeatureMatrix& src = (*this)[m];
    FeatureMatrix& dst = out[m];
    dst.rows = indices.size();
    dst.cols = src.cols;
    dst.values.reserve(indices.size() * src.cols);
    for (std::size_t i : indices) {
      const auto r = src.row(i);
      dst.values.insert(dst.values.end(), r.begin(), r.end());
    }
  }
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels[i]);
  return out;
}

void validate(const ModalityBatch& batch) {
  for (Modality m : kModalities) {
    const FeatureMatrix& f = batch[m];
    if (f.rows != batch.size() || f.values.size() != f.rows * f.cols) {
      fail(ErrorKind::RowCountMismatch, std::string(long_name(m)) + " features have " + std::to_string(f.rows) +
                                            " rows but there are " + std::to_string(batch.size()) + " labels");
    }
  }
  for (std::size_t i = 0; i < batch.labels.size(); ++i) {
    const Scalar y = batch.labels[i];
    if (!(y >= kLabelMin && y <= kLabelMax)) {
      fail(ErrorKind::LabelOutOfRange, "label " + format_real(y) + " of sample " + std::to_string(i) +
                                           " outside [-3, 3]");
    }
  }
}

namespace {

ModalityBatch range(const ModalityBatch& all, std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return all.select(idx);
}

SplitDataset split_by_counts(const ModalityBatch& all, std::size_t n_train, std::size_t n_val) {
  SplitDataset out;
  out.train = range(all, 0, n_train);
  out.val = range(all, n_train, n_train + n_val);
  out.test = range(all, n_train + n_val, all.size());
  return out;
}

}  // namespace

SplitDataset split_70_10_20(const ModalityBatch& all) {
  const std::size_t n = all.size();
  return split_by_counts(all, n * 7 / 10, n / 10);
}

ModalityBatch concat_rows(std::span<const ModalityBatch> parts) {
  ModalityBatch out;
  for (const ModalityBatch& part : parts) {
    for (Modality m : kModalities) {
      FeatureMatrix& dst = out[m];
      const FeatureMatrix& src = part[m];
      if (dst.rows == 0) dst.cols = src.cols;
      if (src.rows > 0 && src.cols != dst.cols) fail(ErrorKind::ShapeMismatch, "feature widths differ");
      dst.rows += src.rows;
      dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
    }
    out.labels.insert(out.labels.end(), part.labels.begin(), part.labels.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generation

namespace {

void check_spec(const SynthSpec& spec) {
  if (spec.n < 10) fail(ErrorKind::BadSpec, "n must be >= 10");
  for (Modality m : kModalities) {
    const std::size_t i = index_of(m);
    if (spec.dims[i] == 0) fail(ErrorKind::BadSpec, "d_" + std::string(tag(m)) + " must be >= 1");
    if (!(spec.snr[i] >= 0) || !std::isfinite(spec.snr[i])) {
      fail(ErrorKind::BadSpec, "snr_" + std::string(tag(m)) + " must be a finite value >= 0");
    }
  }
}

}  // namespace

SynthSpec parse_synth_spec(const std::string& text) {
  SynthSpec spec;
  std::optional<Scalar> snr_a, snr_v;
  for (const kv::Entry& e : kv::parse(text, ErrorKind::BadSpec)) {
    if (e.key == "n") {
      spec.n = kv::to_uint(e, ErrorKind::BadSpec);
    } else if (e.key == "d_t") {
      spec.dims[0] = kv::to_uint(e, ErrorKind::BadSpec);
    } else if (e.key == "d_a") {
      spec.dims[1] = kv::to_uint(e, ErrorKind::BadSpec);
    } else if (e.key == "d_v") {
      spec.dims[2] = kv::to_uint(e, ErrorKind::BadSpec);
    } else if (e.key == "snr_t") {
      spec.snr[0] = kv::to_real(e, ErrorKind::BadSpec);
    } else if (e.key == "snr_a") {
      snr_a = kv::to_real(e, ErrorKind::BadSpec);
    } else if (e.key == "snr_v") {
      snr_v = kv::to_real(e, ErrorKind::BadSpec);
    } else if (e.key == "label") {
      if (e.value == "additive") {
        spec.label = LabelFunction::Additive;
      } else if (e.value == "text-dominant") {
        spec.label = LabelFunction::TextDominant;
      } else if (e.value == "balanced") {
        spec.label = LabelFunction::Balanced;
      } else {
        fail(ErrorKind::BadSpec, "field 'label': '" + e.value + "' is not additive, text-dominant or balanced");
      }
    } else if (e.key == "seed") {
      spec.seed = kv::to_uint(e, ErrorKind::BadSpec);
    } else {
      fail(ErrorKind::BadSpec, "line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }
  const Scalar default_nontext = spec.label == LabelFunction::TextDominant ? 0 : 1;
  spec.snr[1] = snr_a.value_or(default_nontext);
  spec.snr[2] = snr_v.value_or(default_nontext);
  check_spec(spec);
  return spec;
}

namespace {

// Fixed random smooth embedding of a latent in [-3, 3]:
// e_j(s) = tanh(slope_j * s / 2 + offset_j).
struct Embedding {
  std::vector<Scalar> slope;
  std::vector<Scalar> offset;

  Embedding(std::size_t dim, Rng& rng) {
    for (std::size_t j = 0; j < dim; ++j) {
      const Scalar sign = rng.uniform() < 0.5 ? -1 : 1;
      slope.push_back(sign * static_cast<Scalar>(rng.uniform(0.5, 1.5)));
      offset.push_back(static_cast<Scalar>(rng.uniform(-0.5, 0.5)));
    }
  }

  Scalar operator()(std::size_t j, Scalar s) const { return std::tanh(slope[j] * s / 2 + offset[j]); }
};

}  // namespace

SplitDataset synth_generate(const SynthSpec& spec) {
  check_spec(spec);
  PerModality<Embedding> embeddings = [&] {
    Rng r0(mix_seed(spec.seed, 1)), r1(mix_seed(spec.seed, 2)), r2(mix_seed(spec.seed, 3));
    return PerModality<Embedding>{Embedding(spec.dims[0], r0), Embedding(spec.dims[1], r1),
                                  Embedding(spec.dims[2], r2)};
  }();
  const PerModality<Scalar>& snr = spec.snr;

  Rng rng(mix_seed(spec.seed, 0));
  ModalityBatch all;
  for (Modality m : kModalities) {
    all[m].cols = spec.dims[index_of(m)];
    all[m].rows = spec.n;
    all[m].values.reserve(spec.n * all[m].cols);
  }
  all.labels.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    PerModality<Scalar> latent{};
    Scalar y = 0;
    if (spec.label == LabelFunction::Additive) {
      for (Scalar& part : latent) {
        part = static_cast<Scalar>(rng.uniform(-1, 1));
        y += part;
      }
      for (Scalar& part : latent) part *= 3;  // each modality sees its part on [-3, 3]
    } else {
      y = static_cast<Scalar>(rng.uniform(-3, 3));
      latent = {y, y, y};
    }
    all.labels.push_back(std::clamp(y, kLabelMin, kLabelMax));
    for (Modality m : kModalities) {
      const std::size_t mi = index_of(m);
      for (std::size_t j = 0; j < spec.dims[mi]; ++j) {
        const Scalar signal = snr[mi] * embeddings[mi](j, latent[mi]);
        all[m].values.push_back(signal + static_cast<Scalar>(rng.normal()));
      }
    }
  }
  return split_70_10_20(all);
}

// ---------------------------------------------------------------------------
// CSV interchange

namespace {

constexpr const char* kFileNames[] = {"text.csv", "audio.csv", "visual.csv"};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out.flush()) fail(ErrorKind::IoError, "write to '" + path.string() + "' failed");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "'" + path.string() + "' not found or unreadable");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_text(const FeatureMatrix& f, std::string_view prefix) {
  std::string out;
  for (std::size_t j = 0; j < f.cols; ++j) {
    if (j) out += ',';
    out += std::string(prefix) + std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < f.rows; ++i) {
    for (std::size_t j = 0; j < f.cols; ++j) {
      if (j) out += ',';
      out += format_real(f.values[i * f.cols + j]);
    }
    out += '\n';
  }
  return out;
}

// Returns the data rows; `cols` is checked against every row.
FeatureMatrix parse_csv(const fs::path& path, std::size_t cols) {
  const std::string text = read_file(path);
  FeatureMatrix f;
  f.cols = cols;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
      ++col;
      double v = 0;
      if (!parse_real(cell, v) || !std::isfinite(v)) {
        fail(ErrorKind::ParseError, path.filename().string() + ":" + std::to_string(line_no) + ":" +
                                        std::to_string(col) + ": cannot parse '" + std::string(cell) + "'");
      }
      f.values.push_back(static_cast<Scalar>(v));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != cols) {
      fail(ErrorKind::ParseError, path.filename().string() + ":" + std::to_string(line_no) + ":" +
                                      std::to_string(col) + ": expected " + std::to_string(cols) + " columns");
    }
    ++f.rows;
  }
  if (header) fail(ErrorKind::ParseError, path.filename().string() + ":1:1: missing header row");
  return f;
}

struct Manifest {
  std::size_t n = 0;
  PerModality<std::size_t> dims{};
  std::optional<std::size_t> n_train, n_val, n_test;
};

Manifest read_manifest(const fs::path& dir) {
  Manifest m;
  bool has_n = false;
  PerModality<bool> has_dim{};
  for (const kv::Entry& e : kv::parse(read_file(dir / "manifest"), ErrorKind::BadSpec)) {
    const auto value = static_cast<std::size_t>(kv::to_uint(e, ErrorKind::BadSpec));
    if (e.key == "n") {
      m.n = value;
      has_n = true;
    } else if (e.key == "d_t" || e.key == "d_a" || e.key == "d_v") {
      const std::size_t i = e.key == "d_t" ? 0 : (e.key == "d_a" ? 1 : 2);
      m.dims[i] = value;
      has_dim[i] = true;
    } else if (e.key == "n_train") {
      m.n_train = value;
    } else if (e.key == "n_val") {
      m.n_val = value;
    } else if (e.key == "n_test") {
      m.n_test = value;
    } else {
      fail(ErrorKind::BadSpec, "manifest line " + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
  }
  if (!has_n || !has_dim[0] || !has_dim[1] || !has_dim[2]) {
    fail(ErrorKind::BadSpec, "manifest must define n, d_t, d_a and d_v");
  }
  return m;
}

}  // namespace

void write_features(const SplitDataset& dataset, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::IoError, "cannot create directory '" + dir.string() + "'");
  const ModalityBatch parts[] = {dataset.train, dataset.val, dataset.test};
  const ModalityBatch all = concat_rows(parts);
  for (Modality m : kModalities) {
    write_file(dir / kFileNames[index_of(m)], csv_text(all[m], tag(m)));
  }
  std::string labels = "y\n";
  for (Scalar y : all.labels) labels += format_real(y) + "\n";
  write_file(dir / "labels.csv", labels);
  std::string manifest;
  manifest += "n=" + std::to_string(all.size()) + "\n";
  manifest += "d_t=" + std::to_string(all[Modality::Text].cols) + "\n";
  manifest += "d_a=" + std::to_string(all[Modality::Audio].cols) + "\n";
  manifest += "d_v=" + std::to_string(all[Modality::Visual].cols) + "\n";
  manifest += "n_train=" + std::to_string(dataset.train.size()) + "\n";
  manifest += "n_val=" + std::to_string(dataset.val.size()) + "\n";
  manifest += "n_test=" + std::to_string(dataset.test.size()) + "\n";
  write_file(dir / "manifest", manifest);
}

namespace {

ModalityBatch load_with_manifest(const fs::path& dir, const Manifest& manifest) {
  if (!fs::is_directory(dir)) fail(ErrorKind::MissingFile, "data directory '" + dir.string() + "' not found");
  ModalityBatch batch;
  for (Modality m : kModalities) {
    const fs::path path = dir / kFileNames[index_of(m)];
    batch[m] = parse_csv(path, manifest.dims[index_of(m)]);
    if (batch[m].rows != manifest.n) {
      fail(ErrorKind::RowCountMismatch, path.filename().string() + " has " + std::to_string(batch[m].rows) +
                                            " rows, manifest says n=" + std::to_string(manifest.n));
    }
  }
  const FeatureMatrix labels = parse_csv(dir / "labels.csv", 1);
  if (labels.rows != manifest.n) {
    fail(ErrorKind::RowCountMismatch, "labels.csv has " + std::to_string(labels.rows) +
                                          " rows, manifest says n=" + std::to_string(manifest.n));
  }
  batch.labels = labels.values;
  validate(batch);
  return batch;
}

}  // namespace

ModalityBatch load_features(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::MissingFile, "data directory '" + dir.string() + "' not found");
  return load_with_manifest(dir, read_manifest(dir));
}

SplitDataset load_split(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::MissingFile, "data directory '" + dir.string() + "' not found");
  const Manifest manifest = read_manifest(dir);
  const ModalityBatch all = load_with_manifest(dir, manifest);
  if (manifest.n_train && manifest.n_val && manifest.n_test) {
    if (*manifest.n_train + *manifest.n_val + *manifest.n_test != all.size()) {
      fail(ErrorKind::BadSpec, "manifest split sizes do not add up to n");
    }
    return split_by_counts(all, *manifest.n_train, *manifest.n_val);
  }
  return split_70_10_20(all);
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> minibatch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                        std::uint64_t epoch) {
  if (batch_size == 0) fail(ErrorKind::ConfigError, "batch size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x5eed0000ull + epoch));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(end));
  }
  return batches;
}

std::vector<ModalityBatch> minibatches(const ModalityBatch& dataset, std::size_t batch_size, std::uint64_t seed,
                                       std::uint64_t epoch) {
  std::vector<ModalityBatch> out;
  for (const auto& idx : minibatch_indices(dataset.size(), batch_size, seed, epoch)) out.push_back(dataset.select(idx));
  return out;
}

Standardizer Standardizer::fit(const ModalityBatch& reference) {
  if (reference.empty()) fail(ErrorKind::EmptyDataset, "cannot fit standardization on an empty batch");
  Standardizer s;
  for (Modality m : kModalities) {
    const FeatureMatrix& f = reference[m];
    auto& mean = s.mean[index_of(m)];
    auto& sd = s.stddev[index_of(m)];
    mean.assign(f.cols, 0);
    sd.assign(f.cols, 0);
    for (std::size_t i = 0; i < f.rows; ++i)
      for (std::size_t j = 0; j < f.cols; ++j) mean[j] += f.values[i * f.cols + j];
    for (Scalar& v : mean) v /= static_cast<Scalar>(f.rows);
    for (std::size_t i = 0; i < f.rows; ++i)
      for (std::size_t j = 0; j < f.cols; ++j) {
        const Scalar d = f.values[i * f.cols + j] - mean[j];
        sd[j] += d * d;
      }
    for (Scalar& v : sd) {
      v = std::sqrt(v / static_cast<Scalar>(f.rows));
      if (!(v > Scalar(1e-12))) v = 1;  // constant column
    }
  }
  return s;
}

Standardizer Standardizer::identity(const PerModality<std::size_t>& dims) {
  Standardizer s;
  for (std::size_t i = 0; i < kNumModalities; ++i) {
    s.mean[i].assign(dims[i], 0);
    s.stddev[i].assign(dims[i], 1);
  }
  return s;
}

void Standardizer::apply(ModalityBatch& batch) const {
  for (Modality m : kModalities) {
    FeatureMatrix& f = batch[m];
    const auto& mu = mean[index_of(m)];
    const auto& sd = stddev[index_of(m)];
    if (mu.size() != f.cols) {
      fail(ErrorKind::ShapeMismatch, std::string(long_name(m)) + " features have " + std::to_string(f.cols) +
                                         " columns, standardization expects " + std::to_string(mu.size()));
    }
    for (std::size_t i = 0; i < f.rows; ++i)
      for (std::size_t j = 0; j < f.cols; ++j) {
        Scalar& v = f.values[i * f.cols + j];
        v = (v - mu[j]) / sd[j];
      }
  }
}

}  // namespace kanmcp::data
