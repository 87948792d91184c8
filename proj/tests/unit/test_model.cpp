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

#include <cmath>
#include <numeric>

#include "kanmcp/model.hpp"
#include "support.hpp"

namespace kanmcp::model {
namespace {

RunConfig tiny_config() {
  RunConfig c;
  c.code_dim = 2;
  c.mid_dim = 5;
  c.head_hidden = {3};
  c.batch_size = 16;
  c.seed = 3;
  return c;
}

data::SplitDataset tiny_data(std::size_t n = 200, std::uint64_t seed = 1,
                             data::LabelFunction label = data::LabelFunction::Balanced) {
  data::SynthSpec spec;
  spec.n = n;
  spec.dims = {4, 4, 4};
  spec.seed = seed;
  spec.label = label;
  return data::synth_generate(spec);
}

const PerModality<std::size_t> kDims{4, 4, 4};

std::vector<Tensor> snapshot(const KanMcpModel& m) {
  std::vector<Tensor> out;
  for (const Parameter* p : m.parameters()) out.push_back(p->value());
  return out;
}

TEST(TemporalAverage, Examples) {
  EXPECT_EQ(temporal_average(data::FeatureMatrix{1, 3, {1, 2, 3}}), (std::vector<Scalar>{1, 2, 3}));
  EXPECT_EQ(temporal_average(data::FeatureMatrix{2, 2, {1, 1, 3, 3}}), (std::vector<Scalar>{2, 2}));
  EXPECT_EQ(temporal_average(data::FeatureMatrix{3, 1, {0.7, 0.7, 0.7}}), (std::vector<Scalar>{0.7}));
  EXPECT_EQ(temporal_average(Tensor::matrix(2, 2, {1, 1, 3, 3})), Tensor::vector({2, 2}));
  EXPECT_KIND(temporal_average(data::FeatureMatrix{0, 3, {}}), ErrorKind::EmptySequence);
}

TEST(Model, LayoutAndNames) {
  const KanMcpModel m(RunConfig{}, {16, 8, 4});
  EXPECT_EQ(m.head().widths(), (std::vector<std::size_t>{9, 4, 1}));
  EXPECT_EQ(m.encoder(Modality::Audio).d_in(), 8u);
  std::set<std::string> names;
  for (const Parameter* p : m.parameters()) EXPECT_TRUE(names.insert(p->name()).second) << p->name();
  std::set<std::string> grouped;
  for (const pareto::ParamGroup& g : m.group_layout()) {
    for (const std::string& p : g.params) EXPECT_TRUE(grouped.insert(p).second) << p;
  }
  EXPECT_EQ(names, grouped);
  EXPECT_NE(m.find("enc.t.mu.fc1.weight"), nullptr);
  EXPECT_NE(m.find("dec.v.bias"), nullptr);
  EXPECT_NE(m.find("head.l1.coef"), nullptr);
  EXPECT_EQ(m.find("nope"), nullptr);
  EXPECT_KIND(KanMcpModel(parse_config("beta = -1"), kDims), ErrorKind::ConfigError);
}

TEST(Model, ConstructionIsSeeded) {
  RunConfig c = tiny_config();
  const KanMcpModel a(c, kDims), b(c, kDims);
  EXPECT_EQ(snapshot(a), snapshot(b));
  c.seed = 4;
  EXPECT_NE(snapshot(KanMcpModel(c, kDims)), snapshot(a));
}

TEST(Forward, ZeroedModelPredictsZero) {
  KanMcpModel m(tiny_config(), kDims);
  m.zero();
  const data::SplitDataset d = tiny_data();
  const ForwardResult r = forward(m, d.val);
  EXPECT_EQ(r.y_multi.value(), Tensor::zeros({d.val.size(), 1}));
  for (const Var& y : r.y_unimodal) EXPECT_EQ(y.value(), Tensor::zeros({d.val.size(), 1}));
}

TEST(Forward, ShapesAndDeterminism) {
  const KanMcpModel m(tiny_config(), kDims);
  const data::SplitDataset d = tiny_data();
  Rng rng(5);
  const Noise eps = draw_noise(rng, d.val.size(), 2);
  const ForwardResult a = forward(m, d.val, &eps), b = forward(m, d.val, &eps);
  EXPECT_EQ(a.y_multi.shape(), (Shape{d.val.size(), 1}));
  EXPECT_EQ(a.head_input.shape(), (Shape{d.val.size(), 6}));
  EXPECT_EQ(a.y_multi.value(), b.y_multi.value());
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.y_unimodal[i].shape(), (Shape{d.val.size(), 1}));
    EXPECT_EQ(a.y_unimodal[i].value(), b.y_unimodal[i].value());
  }
  for (Scalar v : a.head_input.value().data()) EXPECT_LT(std::abs(v), 1);
  // no noise means posterior means
  const ForwardResult mean = forward(m, d.val);
  const Noise zeros = zero_noise(d.val.size(), 2);
  const ForwardResult zero = forward(m, d.val, &zeros);
  EXPECT_EQ(mean.y_multi.value(), zero.y_multi.value());
}

TEST(Forward, Errors) {
  const KanMcpModel m(tiny_config(), kDims);
  data::SplitDataset d = tiny_data();
  EXPECT_KIND(forward(m, data::ModalityBatch{}), ErrorKind::EmptyDataset);
  const KanMcpModel wide(tiny_config(), {5, 4, 4});
  EXPECT_KIND(forward(wide, d.val), ErrorKind::ShapeMismatch);
  d.val.labels.pop_back();
  EXPECT_KIND(forward(m, d.val), ErrorKind::RowCountMismatch);
}

TEST(Forward, PermutingTheBatchPermutesPredictions) {
  const KanMcpModel m(tiny_config(), kDims);
  const data::SplitDataset d = tiny_data();
  std::vector<std::size_t> perm(d.val.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(6);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  const data::ModalityBatch shuffled = d.val.select(perm);
  const ForwardResult a = forward(m, d.val), b = forward(m, shuffled);
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(b.y_multi.value()[i], a.y_multi.value()[perm[i]]);
  const auto loss = [](const ForwardResult& r, const data::ModalityBatch& batch) {
    std::map<Modality, Var> uni;
    std::map<Modality, mib::Code> codes;
    for (Modality mm : kModalities) {
      uni[mm] = r.y_unimodal[index_of(mm)];
      codes[mm] = r.codes[index_of(mm)];
    }
    return mib::drd_mib_loss(r.y_multi, uni, codes, constant(batch.label_tensor()), 0.1).total.value().item();
  };
  EXPECT_NEAR(loss(a, d.val), loss(b, shuffled), 1e-10);
}

TEST(GradCheck, FullObjectiveOnTinyDims) {
  KanMcpModel m(tiny_config(), kDims);
  Rng rng(7);
  for (Parameter* p : m.head().parameters()) {
    for (Scalar& v : p->mutable_data()) v = static_cast<Scalar>(rng.normal(0, 0.3));
  }
  const data::SplitDataset d = tiny_data(30);
  data::ModalityBatch batch = d.train.select(std::vector<std::size_t>{0, 1, 2});
  batch.labels = {2.5, -2.5, 2.8};  // far from every prediction, away from the MAE kink
  const Noise eps = draw_noise(rng, 3, 2);
  const auto objective = [&] {
    const ForwardResult r = forward(m, batch, &eps);
    std::map<Modality, Var> uni;
    std::map<Modality, mib::Code> codes;
    for (Modality mm : kModalities) {
      uni[mm] = r.y_unimodal[index_of(mm)];
      codes[mm] = r.codes[index_of(mm)];
    }
    return mib::drd_mib_loss(r.y_multi, uni, codes, constant(batch.label_tensor()), 0.5).total;
  };
  const std::vector<Parameter*> ps = m.parameters();
  EXPECT_LT(grad_check(objective, ps), 1e-4);
}

TEST(Adam, FirstStepMovesByTheLearningRate) {
  AdamState adam;
  Parameter a("a", Tensor::vector({1, 2})), b("b", Tensor::vector({3})), c("c", Tensor::vector({4}));
  std::vector<Parameter*> ps{&a, &b, &c};
  GradientMap g{{"a", Tensor::vector({0.5, -2})}, {"b", Tensor::vector({1})}, {"c", Tensor::vector({1})}};
  adam_step(adam, ps, g, [](const std::string& n) { return n == "a" ? Scalar(0.1) : Scalar(0.01); }, {"c"});
  EXPECT_NEAR(a.value()[0], 1 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(a.value()[1], 2 + 0.1 * 2 / (2 + 1e-8), 1e-15);
  EXPECT_NEAR(b.value()[0], 3 - 0.01 / (1 + 1e-8), 1e-15);
  EXPECT_EQ(c.value()[0], 4);
  EXPECT_EQ(adam.first.count("c"), 0u);
  EXPECT_EQ(adam.steps, 1u);
  // second step with the same gradient keeps the bias-corrected size
  adam_step(adam, ps, g, [](const std::string&) { return Scalar(0.1); });
  EXPECT_NEAR(b.value()[0], 3 - 0.01 / (1 + 1e-8) - 0.1 / (1 + 1e-8), 1e-12);
}

TEST(Adam, TextGroupUsesTheTextRate) {
  RunConfig cfg = tiny_config();
  cfg.text_lr = 0.5;
  cfg.other_lr = 0.001;
  TrainState s(cfg, kDims);
  const Tensor t0 = s.model.find("dec.t.bias")->value(), a0 = s.model.find("dec.a.bias")->value();
  adam_update(s, GradientMap{{"dec.t.bias", Tensor::vector({1})}, {"dec.a.bias", Tensor::vector({1})}});
  EXPECT_NEAR(s.model.find("dec.t.bias")->value()[0], t0[0] - 0.5, 1e-6);
  EXPECT_NEAR(s.model.find("dec.a.bias")->value()[0], a0[0] - 0.001, 1e-6);
}

TEST(Train, DeterministicTrajectories) {
  const data::SplitDataset d = tiny_data();
  TrainState a(tiny_config(), kDims), b(tiny_config(), kDims);
  for (int e = 0; e < 3; ++e) {
    train_epoch(a, d.train);
    train_epoch(b, d.train);
  }
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.history.epochs(), 3u);
  EXPECT_EQ(a.epoch, 3u);
  EXPECT_EQ(snapshot(a.model), snapshot(b.model));
  EXPECT_EQ(a.rng.state(), b.rng.state());
  EXPECT_EQ(a.adam, b.adam);
}

TEST(Train, PlainMultimodalTrainingReducesTheLoss) {
  RunConfig cfg = tiny_config();
  cfg.beta = 0;
  cfg.other_lr = cfg.text_lr = 1e-2;
  TrainState s(cfg, kDims);
  for (Modality m : kModalities) {
    mib::Affine& dec = s.model.decoder(m);
    dec.weight().assign(Tensor::zeros(dec.weight().shape()));
    dec.bias().assign(Tensor::zeros(dec.bias().shape()));
    s.frozen.insert(dec.weight().name());
    s.frozen.insert(dec.bias().name());
  }
  const data::SplitDataset d = tiny_data(400, 2, data::LabelFunction::Additive);
  const auto batches = data::minibatches(d.train, 32, 0, 0);
  std::vector<Scalar> losses;
  for (int step = 0; step < 50; ++step) {
    const StepResult r = train_step(s, batches[static_cast<std::size_t>(step) % batches.size()]);
    losses.push_back(r.losses.multi);
    for (const pareto::GroupDecision& g : r.decisions) EXPECT_FALSE(g.decision.conflict);
  }
  for (Modality m : kModalities) EXPECT_EQ(s.model.decoder(m).weight().value(), Tensor::zeros({2, 1}));
  const Scalar head = std::accumulate(losses.begin(), losses.begin() + 10, Scalar(0));
  const Scalar tail = std::accumulate(losses.end() - 10, losses.end(), Scalar(0));
  EXPECT_LT(tail, 0.8 * head);
}

TEST(Train, ParetoMatchesTheSumUntilTheFirstConflict) {
  RunConfig on = tiny_config(), off = tiny_config();
  off.mcpareto = false;
  TrainState a(on, kDims), b(off, kDims);
  const data::SplitDataset d = tiny_data(400, 3);
  const auto batches = data::minibatches(d.train, 16, 0, 0);
  bool saw_conflict = false;
  for (const data::ModalityBatch& batch : batches) {
    const StepResult ra = train_step(a, batch);
    train_step(b, batch);
    bool conflict = false;
    for (const pareto::GroupDecision& g : ra.decisions) conflict = conflict || (g.decision.conflict && !g.decision.degenerate);
    if (!conflict) {
      ASSERT_EQ(snapshot(a.model), snapshot(b.model));
      continue;
    }
    EXPECT_NE(snapshot(a.model), snapshot(b.model));
    saw_conflict = true;
    break;
  }
  EXPECT_TRUE(saw_conflict);
}

TEST(Train, NoConflictsMeansIdenticalTrajectories) {
  // a zero, frozen head passes no multimodal gradient to the encoders, so
  // every cosine is 0 and the two modes must agree bitwise
  RunConfig on = tiny_config(), off = tiny_config();
  off.mcpareto = false;
  TrainState a(on, kDims), b(off, kDims);
  for (TrainState* s : {&a, &b}) {
    for (Parameter* p : s->model.head().parameters()) {
      p->assign(Tensor::zeros(p->shape()));
      s->frozen.insert(p->name());
    }
  }
  const data::SplitDataset d = tiny_data();
  for (int e = 0; e < 2; ++e) {
    train_epoch(a, d.train, [](const StepResult& r) {
      for (const pareto::GroupDecision& g : r.decisions) ASSERT_FALSE(g.decision.conflict);
    });
    train_epoch(b, d.train);
  }
  EXPECT_EQ(snapshot(a.model), snapshot(b.model));
  EXPECT_EQ(a.history, b.history);
}

TEST(Train, LargerBetaGivesSmallerKl) {
  const data::SplitDataset d = tiny_data(400, 4);
  std::vector<Scalar> kls;
  for (Scalar beta : {0.0, 0.1, 1.0}) {
    RunConfig cfg = tiny_config();
    cfg.beta = beta;
    cfg.other_lr = cfg.text_lr = 5e-3;
    TrainState s(cfg, kDims);
    for (int e = 0; e < 15; ++e) train_epoch(s, d.train);
    const ForwardResult r = forward(s.model, d.train);
    Scalar kl = 0;
    for (const mib::Code& c : r.codes) kl += mib::kl_std_normal(c.mu, c.logvar).value().item();
    kls.push_back(kl / static_cast<Scalar>(d.train.size()));
  }
  EXPECT_GE(kls[0], kls[1]);
  EXPECT_GE(kls[1], kls[2]);
}

TEST(Train, GridRefitRunsOnSchedule) {
  RunConfig cfg = tiny_config();
  cfg.grid_refit_every = 2;
  TrainState s(cfg, kDims);
  const data::SplitDataset d = tiny_data();
  const spline::Grid before = s.model.head().layers()[0].grid();
  train_epoch(s, d.train);
  EXPECT_EQ(s.model.head().layers()[0].grid().knots(), before.knots());
  train_epoch(s, d.train);
  EXPECT_NE(s.model.head().layers()[0].grid().knots(), before.knots());
  EXPECT_NO_THROW(evaluate(s.model, d.val));
}

TEST(Evaluate, IndependentOfWorkerCount) {
  TrainState s(tiny_config(), kDims);
  const data::SplitDataset d = tiny_data(300);
  train_epoch(s, d.train);
  const EvalReport one = evaluate(s.model, d.test, 1);
  for (std::size_t w : {2u, 3u, 7u, 200u}) {
    const EvalReport many = evaluate(s.model, d.test, w);
    EXPECT_EQ(many.predictions, one.predictions);
    EXPECT_EQ(many.metrics, one.metrics);
    EXPECT_EQ(many.unimodal_mae, one.unimodal_mae);
  }
  EXPECT_EQ(one.predictions.size(), d.test.size());
  EXPECT_KIND(evaluate(s.model, data::ModalityBatch{}), ErrorKind::EmptyDataset);
}

TEST(Evaluate, ConstantPredictorConventions) {
  KanMcpModel m(tiny_config(), kDims);
  m.zero();
  const data::SplitDataset d = tiny_data();
  const EvalReport r = evaluate(m, d.test);
  EXPECT_FALSE(r.metrics.corr_defined);
  EXPECT_EQ(r.metrics.corr, 0);
  std::size_t nonneg = 0, nonzero = 0;
  double abs_sum = 0;
  for (Scalar y : d.test.labels) {
    nonzero += y != 0;
    nonneg += y > 0;
    abs_sum += std::abs(y);
  }
  EXPECT_NEAR(r.metrics.acc2, 100.0 * static_cast<double>(nonneg) / static_cast<double>(nonzero), 1e-12);
  EXPECT_NEAR(r.metrics.mae, abs_sum / static_cast<double>(d.test.size()), 1e-12);
  for (Scalar u : r.unimodal_mae) EXPECT_NEAR(u, r.metrics.mae, 1e-12);
}

TEST(Attribution, ShapesAndEmptyProbe) {
  const KanMcpModel m(tiny_config(), kDims);
  const data::SplitDataset d = tiny_data();
  const auto attr = attribution(m, d.val);
  ASSERT_EQ(attr.size(), 2u);
  EXPECT_EQ(attr[0].n_in, 6u);
  EXPECT_EQ(attr[0].n_out, 3u);
  EXPECT_KIND(attribution(m, data::ModalityBatch{}), ErrorKind::EmptyProbe);
}

}  // namespace
}  // namespace kanmcp::model
