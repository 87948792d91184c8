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

#ifndef KANMCP_MODEL_HPP
#define KANMCP_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kanmcp/config.hpp"
#include "kanmcp/data.hpp"
#include "kanmcp/drd_mib.hpp"
#include "kanmcp/kan.hpp"
#include "kanmcp/metrics.hpp"
#include "kanmcp/modality.hpp"
#include "kanmcp/pareto.hpp"
#include "kanmcp/rng.hpp"

namespace kanmcp::model {

/// Column-wise mean over the time steps of a [T, d] sequence. Throws
/// EmptySequence when T == 0.
std::vector<Scalar> temporal_average(const data::FeatureMatrix& sequence);
Tensor temporal_average(const Tensor& sequence);

/// Per-modality Gaussian encoders "enc.{t,a,v}", affine decoders
/// "dec.{t,a,v}" from the code to a score, and a KAN head "head" over the
/// concatenated codes.
class KanMcpModel {
 public:
  /// Encoders and decoders are drawn from mix_seed(seed, 1), the head from
  /// mix_seed(seed, 2). Throws ConfigError or BadWidths.
  KanMcpModel(const RunConfig& config, const PerModality<std::size_t>& input_dims);

  const RunConfig& config() const noexcept { return config_; }
  const PerModality<std::size_t>& input_dims() const noexcept { return input_dims_; }

  const mib::GaussianEncoder& encoder(Modality m) const { return encoders_[index_of(m)]; }
  mib::GaussianEncoder& encoder(Modality m) { return encoders_[index_of(m)]; }
  const mib::Affine& decoder(Modality m) const { return decoders_[index_of(m)]; }
  mib::Affine& decoder(Modality m) { return decoders_[index_of(m)]; }
  const kan::KanNetwork& head() const noexcept { return head_; }
  kan::KanNetwork& head() noexcept { return head_; }

  /// Encoders (t, a, v), decoders (t, a, v), then the head.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  const Parameter* find(const std::string& name) const;
  Parameter* find(const std::string& name);

  /// One encoder group per affine layer, one group per head layer, one
  /// group per decoder.
  const std::vector<pareto::ParamGroup>& group_layout() const noexcept { return layout_; }

  /// Sets every parameter to zero.
  void zero();

 private:
  RunConfig config_;
  PerModality<std::size_t> input_dims_{};
  PerModality<mib::GaussianEncoder> encoders_;
  PerModality<mib::Affine> decoders_;
  kan::KanNetwork head_;
  std::vector<pareto::ParamGroup> layout_;
};

struct ForwardResult {
  Var y_multi;                // [batch, 1]
  PerModality<Var> y_unimodal;  // [batch, 1] each
  PerModality<mib::Code> codes;
  Var head_input;  // tanh(concat(h_t, h_a, h_v))
};

/// Noise draws for one batch, [batch, d_h] per modality.
using Noise = PerModality<Tensor>;

/// Noise of zeros, which makes every code its posterior mean.
Noise zero_noise(std::size_t batch, std::size_t code_dim);

/// Standard normal noise drawn text first, then audio, then visual, each
/// in row-major order.
Noise draw_noise(Rng& rng, std::size_t batch, std::size_t code_dim);

/// Throws ShapeMismatch on feature widths that differ from the model and
/// EmptyDataset on an empty batch. Without `noise` the codes are the means.
ForwardResult forward(const KanMcpModel& model, const data::ModalityBatch& batch, const Noise* noise = nullptr);

/// Per-epoch mean training losses.
struct LossHistory {
  std::vector<Scalar> multi;
  PerModality<std::vector<Scalar>> unimodal;

  std::size_t epochs() const { return multi.size(); }
  friend bool operator==(const LossHistory&, const LossHistory&) = default;
};

struct AdamState {
  static constexpr Scalar kBeta1 = 0.9;
  static constexpr Scalar kBeta2 = 0.999;
  static constexpr Scalar kEps = 1e-8;

  std::map<std::string, std::vector<Scalar>> first;
  std::map<std::string, std::vector<Scalar>> second;
  std::uint64_t steps = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct TrainState {
  KanMcpModel model;
  AdamState adam;
  std::uint64_t epoch = 0;
  Rng rng;
  LossHistory history;
  data::Standardizer standardizer;
  /// Parameters excluded from optimizer updates.
  std::set<std::string> frozen;

  TrainState(const RunConfig& config, const PerModality<std::size_t>& input_dims);
};

struct StepLosses {
  Scalar multi = 0;
  PerModality<Scalar> unimodal{};
};

struct StepResult {
  std::uint64_t step = 0;  // 1-based optimizer step count after the update
  StepLosses losses;
  std::vector<pareto::GroupDecision> decisions;
};

/// One optimizer step on the MCPareto-merged gradients of the multimodal
/// loss and the three unimodal losses (plain sum when config.mcpareto is
/// off). Throws EmptyDataset on an empty batch.
StepResult train_step(TrainState& state, const data::ModalityBatch& batch);

/// One Adam update of `params` with `grads` and a per-parameter learning
/// rate. Parameters without a gradient or listed in `frozen` are left
/// untouched, moments included.
void adam_step(AdamState& adam, std::span<Parameter* const> params, const GradientMap& grads,
               const std::function<Scalar(const std::string&)>& learning_rate,
               const std::set<std::string>& frozen = {});

/// adam_step over the model; the text encoder and decoder use text_lr,
/// everything else other_lr.
void adam_update(TrainState& state, const GradientMap& grads);

using StepCallback = std::function<void(const StepResult&)>;

/// One pass over the shuffled training set; appends the sample-weighted
/// mean losses to the history. Refits the head grids afterwards when
/// grid_refit_every divides the new epoch count.
StepLosses train_epoch(TrainState& state, const data::ModalityBatch& train, const StepCallback& on_step = {});

/// Refits every head layer grid to the inputs it sees on `batch`.
void refit_head_grids(KanMcpModel& model, const data::ModalityBatch& batch);

struct EvalReport {
  metrics::MetricReport metrics;
  PerModality<Scalar> unimodal_mae{};
  std::vector<Scalar> predictions;
};

/// Posterior-mean predictions, sharded over `workers` threads. Results do
/// not depend on the worker count. Throws EmptyDataset.
EvalReport evaluate(const KanMcpModel& model, const data::ModalityBatch& dataset, std::size_t workers = 1);

/// Head edge attributions on the posterior-mean head inputs of `probe`.
/// Throws EmptyProbe on an empty batch.
std::vector<kan::EdgeAttribution> attribution(const KanMcpModel& model, const data::ModalityBatch& probe);

}  // namespace kanmcp::model

#endif  // KANMCP_MODEL_HPP
