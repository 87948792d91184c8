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

#include "kanmcp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "kanmcp/error.hpp"

namespace kanmcp::model {

std::vector<Scalar> temporal_average(const data::FeatureMatrix& sequence) {
  if (sequence.rows == 0) fail(ErrorKind::EmptySequence, "temporal_average needs at least one time step");
  // offsets from the first step, so a constant sequence averages exactly
  const auto first = sequence.row(0);
  std::vector<Scalar> offset(sequence.cols, 0);
  for (std::size_t t = 1; t < sequence.rows; ++t) {
    const auto row = sequence.row(t);
    for (std::size_t j = 0; j < sequence.cols; ++j) offset[j] += row[j] - first[j];
  }
  std::vector<Scalar> out(sequence.cols);
  for (std::size_t j = 0; j < sequence.cols; ++j) out[j] = first[j] + offset[j] / static_cast<Scalar>(sequence.rows);
  return out;
}

Tensor temporal_average(const Tensor& sequence) {
  if (sequence.rank() != 2) {
    fail(ErrorKind::ShapeMismatch, "temporal_average expects [T, d], got " + shape_string(sequence.shape()));
  }
  data::FeatureMatrix m{sequence.rows(), sequence.cols(), sequence.vec()};
  return Tensor::vector(temporal_average(m));
}

KanMcpModel::KanMcpModel(const RunConfig& config, const PerModality<std::size_t>& input_dims)
    : config_(config), input_dims_(input_dims) {
  config_.validate();
  const std::vector<std::size_t> widths = config_.head_widths();
  if (widths.front() != kNumModalities * config_.code_dim) {
    fail(ErrorKind::BadWidths, "head input width " + std::to_string(widths.front()) + " != 3 * d_h");
  }
  Rng rng(mix_seed(config_.seed, 1));
  for (Modality m : kModalities) {
    const std::size_t i = index_of(m);
    if (input_dims_[i] == 0) fail(ErrorKind::ShapeMismatch, "modality " + std::string(long_name(m)) + " has width 0");
    const std::string t(tag(m));
    encoders_[i] = mib::GaussianEncoder("enc." + t, input_dims_[i], config_.mid_dim, config_.code_dim);
    encoders_[i].init(rng);
    decoders_[i] = mib::Affine("dec." + t, config_.code_dim, 1);
    decoders_[i].init_uniform(rng);
  }
  head_ = kan::init_kan(widths, config_.grid, mix_seed(config_.seed, 2), "head");

  for (Modality m : kModalities) {
    for (const mib::Affine* layer : encoders_[index_of(m)].layers()) {
      const std::string& w = layer->weight().name();
      layout_.push_back({w.substr(0, w.size() - std::string(".weight").size()), pareto::GroupRole::Encoder, m,
                         {w, layer->bias().name()}});
    }
  }
  for (std::size_t l = 0; l < head_.layers().size(); ++l) {
    pareto::ParamGroup g{"head.l" + std::to_string(l), pareto::GroupRole::Head, std::nullopt, {}};
    for (const Parameter* p : head_.layers()[l].parameters()) g.params.push_back(p->name());
    layout_.push_back(std::move(g));
  }
  for (Modality m : kModalities) {
    const mib::Affine& d = decoders_[index_of(m)];
    layout_.push_back({"dec." + std::string(tag(m)), pareto::GroupRole::Decoder, m, {d.weight().name(), d.bias().name()}});
  }

  std::set<std::string> names;
  for (const Parameter* p : parameters()) {
    if (!names.insert(p->name()).second) fail(ErrorKind::GroupMismatch, "duplicate parameter " + p->name());
  }
}

std::vector<Parameter*> KanMcpModel::parameters() {
  std::vector<Parameter*> out;
  for (auto& e : encoders_) {
    for (Parameter* p : e.parameters()) out.push_back(p);
  }
  for (auto& d : decoders_) {
    out.push_back(&d.weight());
    out.push_back(&d.bias());
  }
  for (Parameter* p : head_.parameters()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> KanMcpModel::parameters() const {
  std::vector<const Parameter*> out;
  for (Parameter* p : const_cast<KanMcpModel*>(this)->parameters()) out.push_back(p);
  return out;
}

Parameter* KanMcpModel::find(const std::string& name) {
  for (Parameter* p : parameters()) {
    if (p->name() == name) return p;
  }
  return nullptr;
}

const Parameter* KanMcpModel::find(const std::string& name) const {
  return const_cast<KanMcpModel*>(this)->find(name);
}

void KanMcpModel::zero() {
  for (Parameter* p : parameters()) std::fill(p->mutable_data().begin(), p->mutable_data().end(), Scalar{0});
}

Noise zero_noise(std::size_t batch, std::size_t code_dim) {
  Noise n;
  for (Tensor& t : n) t = Tensor::zeros({batch, code_dim});
  return n;
}

Noise draw_noise(Rng& rng, std::size_t batch, std::size_t code_dim) {
  Noise n;
  for (Tensor& t : n) {
    std::vector<Scalar> v(batch * code_dim);
    for (Scalar& x : v) x = static_cast<Scalar>(rng.normal());
    t = Tensor::matrix(batch, code_dim, std::move(v));
  }
  return n;
}

ForwardResult forward(const KanMcpModel& model, const data::ModalityBatch& batch, const Noise* noise) {
  if (batch.empty()) fail(ErrorKind::EmptyDataset, "forward needs a non-empty batch");
  const std::size_t b = batch.size();
  for (Modality m : kModalities) {
    const data::FeatureMatrix& f = batch[m];
    if (f.rows != b) {
      fail(ErrorKind::RowCountMismatch, std::string(long_name(m)) + " has " + std::to_string(f.rows) + " rows, labels " +
                                            std::to_string(b));
    }
    if (f.cols != model.input_dims()[index_of(m)]) {
      fail(ErrorKind::ShapeMismatch, std::string(long_name(m)) + " features have width " + std::to_string(f.cols) +
                                         ", model expects " + std::to_string(model.input_dims()[index_of(m)]));
    }
  }
  const std::size_t d_h = model.config().code_dim;
  const Noise zeros = noise ? Noise{} : zero_noise(b, d_h);
  const Noise& eps = noise ? *noise : zeros;

  ForwardResult r;
  std::vector<Var> samples;
  for (Modality m : kModalities) {
    const std::size_t i = index_of(m);
    r.codes[i] = mib::encode(model.encoder(m), constant(batch[m].tensor()), eps[i]);
    samples.push_back(r.codes[i].sample);
    r.y_unimodal[i] = model.decoder(m).forward(r.codes[i].sample);
  }
  r.head_input = tanh(concat(samples, 1));
  r.y_multi = kan::kan_forward(model.head(), r.head_input);
  return r;
}

TrainState::TrainState(const RunConfig& config, const PerModality<std::size_t>& input_dims)
    : model(config, input_dims),
      rng(mix_seed(config.seed, 3)),
      standardizer(data::Standardizer::identity(input_dims)) {}

namespace {

bool is_text_param(const std::string& name) { return name.starts_with("enc.t.") || name.starts_with("dec.t."); }

}  // namespace

void adam_step(AdamState& adam, std::span<Parameter* const> params, const GradientMap& grads,
               const std::function<Scalar(const std::string&)>& learning_rate, const std::set<std::string>& frozen) {
  ++adam.steps;
  const Scalar t = static_cast<Scalar>(adam.steps);
  const Scalar bias1 = 1 - std::pow(AdamState::kBeta1, t);
  const Scalar bias2 = 1 - std::pow(AdamState::kBeta2, t);
  for (Parameter* p : params) {
    if (frozen.contains(p->name())) continue;
    const auto it = grads.find(p->name());
    if (it == grads.end()) continue;
    const auto g = it->second.data();
    if (g.size() != p->numel()) fail(ErrorKind::ShapeMismatch, "gradient size differs for " + p->name());
    auto& m = adam.first[p->name()];
    auto& v = adam.second[p->name()];
    if (m.empty()) {
      m.assign(p->numel(), 0);
      v.assign(p->numel(), 0);
    }
    const Scalar lr = learning_rate(p->name());
    auto w = p->mutable_data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = AdamState::kBeta1 * m[i] + (1 - AdamState::kBeta1) * g[i];
      v[i] = AdamState::kBeta2 * v[i] + (1 - AdamState::kBeta2) * g[i] * g[i];
      const Scalar m_hat = m[i] / bias1;
      const Scalar v_hat = v[i] / bias2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEps);
    }
  }
}

void adam_update(TrainState& state, const GradientMap& grads) {
  const RunConfig& cfg = state.model.config();
  const auto lr = [&cfg](const std::string& name) { return is_text_param(name) ? cfg.text_lr : cfg.other_lr; };
  adam_step(state.adam, state.model.parameters(), grads, lr, state.frozen);
}

StepResult train_step(TrainState& state, const data::ModalityBatch& batch) {
  if (batch.empty()) fail(ErrorKind::EmptyDataset, "train_step needs a non-empty batch");
  const RunConfig& cfg = state.model.config();
  const Noise eps = draw_noise(state.rng, batch.size(), cfg.code_dim);
  const ForwardResult fr = forward(state.model, batch, &eps);

  std::map<Modality, Var> uni;
  std::map<Modality, mib::Code> codes;
  for (Modality m : kModalities) {
    uni[m] = fr.y_unimodal[index_of(m)];
    codes[m] = fr.codes[index_of(m)];
  }
  const mib::LossTerms terms = mib::drd_mib_loss(fr.y_multi, uni, codes, constant(batch.label_tensor()), cfg.beta);

  const GradientMap g_multi = backward(terms.multimodal);
  PerModality<GradientMap> g_uni;
  for (Modality m : kModalities) g_uni[index_of(m)] = backward(terms.unimodal[index_of(m)]);

  pareto::MergeResult merged = pareto::mcpareto_apply(state.model.group_layout(), g_multi, g_uni,
                                                      cfg.mcpareto ? pareto::MergeMode::MCPareto : pareto::MergeMode::Sum);
  adam_update(state, merged.merged);

  StepResult r;
  r.step = state.adam.steps;
  r.losses.multi = terms.multimodal.value().item();
  for (Modality m : kModalities) r.losses.unimodal[index_of(m)] = terms.unimodal[index_of(m)].value().item();
  r.decisions = std::move(merged.decisions);
  return r;
}

StepLosses train_epoch(TrainState& state, const data::ModalityBatch& train, const StepCallback& on_step) {
  if (train.empty()) fail(ErrorKind::EmptyDataset, "training split is empty");
  const RunConfig& cfg = state.model.config();
  StepLosses total;
  for (const data::ModalityBatch& batch : data::minibatches(train, cfg.batch_size, cfg.seed, state.epoch)) {
    const StepResult r = train_step(state, batch);
    const Scalar w = static_cast<Scalar>(batch.size());
    total.multi += w * r.losses.multi;
    for (std::size_t i = 0; i < kNumModalities; ++i) total.unimodal[i] += w * r.losses.unimodal[i];
    if (on_step) on_step(r);
  }
  const Scalar n = static_cast<Scalar>(train.size());
  total.multi /= n;
  for (Scalar& u : total.unimodal) u /= n;
  state.history.multi.push_back(total.multi);
  for (std::size_t i = 0; i < kNumModalities; ++i) state.history.unimodal[i].push_back(total.unimodal[i]);
  ++state.epoch;
  if (cfg.grid_refit_every != 0 && state.epoch % cfg.grid_refit_every == 0) refit_head_grids(state.model, train);
  return total;
}

void refit_head_grids(KanMcpModel& model, const data::ModalityBatch& batch) {
  Tensor x = forward(model, batch).head_input.value();
  for (kan::KanLayer& layer : model.head().layers()) {
    kan::refit_grid(layer, x);
    x = kan::kan_layer_forward(layer, constant(x)).value();
  }
}

namespace {

struct ShardOutput {
  std::vector<Scalar> multi;
  PerModality<std::vector<Scalar>> unimodal;
};

ShardOutput predict_rows(const KanMcpModel& model, const data::ModalityBatch& batch) {
  const ForwardResult fr = forward(model, batch);
  ShardOutput out;
  out.multi = fr.y_multi.value().vec();
  for (std::size_t i = 0; i < kNumModalities; ++i) out.unimodal[i] = fr.y_unimodal[i].value().vec();
  return out;
}

}  // namespace

EvalReport evaluate(const KanMcpModel& model, const data::ModalityBatch& dataset, std::size_t workers) {
  if (dataset.empty()) fail(ErrorKind::EmptyDataset, "cannot evaluate an empty dataset");
  const std::size_t n = dataset.size();
  const std::size_t shards = std::clamp<std::size_t>(workers, 1, n);
  std::vector<data::ModalityBatch> parts(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    std::vector<std::size_t> idx(n * (s + 1) / shards - n * s / shards);
    std::iota(idx.begin(), idx.end(), n * s / shards);
    parts[s] = dataset.select(idx);
  }
  std::vector<ShardOutput> outputs(shards);
  if (shards == 1) {
    outputs[0] = predict_rows(model, parts[0]);
  } else {
    std::vector<std::exception_ptr> errors(shards);
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < shards; ++s) {
      pool.emplace_back([&, s] {
        try {
          outputs[s] = predict_rows(model, parts[s]);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  EvalReport report;
  PerModality<std::vector<Scalar>> uni;
  for (const ShardOutput& o : outputs) {
    report.predictions.insert(report.predictions.end(), o.multi.begin(), o.multi.end());
    for (std::size_t i = 0; i < kNumModalities; ++i) uni[i].insert(uni[i].end(), o.unimodal[i].begin(), o.unimodal[i].end());
  }
  report.metrics = metrics::evaluate_scores(report.predictions, dataset.labels);
  for (std::size_t i = 0; i < kNumModalities; ++i) report.unimodal_mae[i] = metrics::mae(uni[i], dataset.labels);
  return report;
}

std::vector<kan::EdgeAttribution> attribution(const KanMcpModel& model, const data::ModalityBatch& probe) {
  if (probe.empty()) fail(ErrorKind::EmptyProbe, "attribution needs a non-empty probe batch");
  return kan::edge_attribution(model.head(), forward(model, probe).head_input.value());
}

}  // namespace kanmcp::model
