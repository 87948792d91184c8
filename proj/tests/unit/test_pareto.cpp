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

#include "kanmcp/pareto.hpp"
#include "support.hpp"

namespace kanmcp::pareto {
namespace {

FlatGrad fg(std::vector<Scalar> v) { return FlatGrad("g", std::move(v)); }

double norm_of(const std::vector<Scalar>& v) {
  double s = 0;
  for (Scalar x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// |a g_m + (1 - a) g_u| minimized over a grid on [0, 1].
double grid_alpha(const std::vector<Scalar>& gm, const std::vector<Scalar>& gu, double step) {
  double best = 0, best_norm = 1e300;
  for (double a = 0; a <= 1 + 1e-12; a += step) {
    std::vector<Scalar> mix(gm.size());
    for (std::size_t i = 0; i < gm.size(); ++i) mix[i] = a * gm[i] + (1 - a) * gu[i];
    const double n = norm_of(mix);
    if (n < best_norm) {
      best_norm = n;
      best = a;
    }
  }
  return best;
}

TEST(FlatGrad, CachesTheNorm) {
  EXPECT_NEAR(fg({3, 4}).norm, 5, 1e-12);
  EXPECT_EQ(fg({0, 0}).norm, 0);
}

TEST(Cosine, Examples) {
  EXPECT_EQ(cosine(fg({1, 0}), fg({0, 1})), 0);
  EXPECT_NEAR(cosine(fg({1, 1}), fg({2, 2})), 1, 1e-15);
  EXPECT_NEAR(cosine(fg({1, 0}), fg({-1, 0})), -1, 1e-15);
  EXPECT_EQ(cosine(fg({0, 0}), fg({1, 1})), 0);
  EXPECT_KIND(cosine(fg({1, 0}), fg({1, 0, 0})), ErrorKind::LengthMismatch);
}

TEST(MinNormAlpha, Examples) {
  const std::vector<Scalar> a{1, 0}, b{0, 1};
  EXPECT_NEAR(min_norm_alpha(a, b), 0.5, 1e-15);
  EXPECT_NEAR(min_norm_alpha(a, b), grid_alpha(a, b, 1e-4), 1e-4);
  const std::vector<Scalar> gm{2, 0}, gu{-1, 1};
  EXPECT_NEAR(min_norm_alpha(gm, gu), 0.4, 1e-15);
  EXPECT_NEAR(min_norm_alpha(gm, gu), grid_alpha(gm, gu, 1e-4), 1e-4);
  EXPECT_EQ(min_norm_alpha(gm, gm), 0.5);
  const std::vector<Scalar> z{0, 0};
  EXPECT_KIND(min_norm_alpha(z, z), ErrorKind::BothZero);
}

TEST(MinNormAlpha, ClampsToTheSegment) {
  // g_u lies beyond g_m on the same ray: the minimum is at the shorter end
  const std::vector<Scalar> gm{1, 0}, gu{3, 0};
  EXPECT_EQ(min_norm_alpha(gm, gu), 1);
  EXPECT_EQ(min_norm_alpha(gu, gm), 0);
}

TEST(MinNormAlpha, OptimalAgainstAGridOn1000Pairs) {
  Rng rng(21);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.uniform_int(6);
    const std::vector<Scalar> gm = testing::normals(rng, n), gu = testing::normals(rng, n);
    const double a = min_norm_alpha(gm, gu);
    std::vector<Scalar> best(n);
    for (std::size_t i = 0; i < n; ++i) best[i] = a * gm[i] + (1 - a) * gu[i];
    const double best_norm = norm_of(best);
    for (int k = 0; k <= 1000; ++k) {
      const double b = k * 1e-3;
      std::vector<Scalar> mix(n);
      for (std::size_t i = 0; i < n; ++i) mix[i] = b * gm[i] + (1 - b) * gu[i];
      ASSERT_LE(best_norm, norm_of(mix) + 1e-9);
    }
  }
}

TEST(Combine, AlignedIsTheSum) {
  const ParetoDecision d = combine(fg({1, 0}), fg({1, 1}));
  EXPECT_FALSE(d.conflict);
  EXPECT_EQ(d.combined, (std::vector<Scalar>{2, 1}));
  EXPECT_EQ(d.lambda, 1);
  EXPECT_EQ(d.alpha_m, 0.5);
  EXPECT_EQ(d.alpha_u, 0.5);
}

TEST(Combine, OrthogonalIsNotAConflict) {
  const ParetoDecision d = combine(fg({1, 0}), fg({0, 3}));
  EXPECT_EQ(d.cos_beta, 0);
  EXPECT_FALSE(d.conflict);
  EXPECT_EQ(d.combined, (std::vector<Scalar>{1, 3}));
}

TEST(Combine, ConflictExample) {
  const ParetoDecision d = combine(fg({2, 0}), fg({-1, 1}));
  EXPECT_TRUE(d.conflict);
  EXPECT_FALSE(d.degenerate);
  EXPECT_NEAR(d.alpha_m, 0.4, 1e-15);
  EXPECT_NEAR(d.alpha_u, 0.6, 1e-15);
  EXPECT_NEAR(d.lambda, std::sqrt(2.0) / std::sqrt(1.6), 1e-12);
  EXPECT_NEAR(d.lambda, 1.1180, 1e-4);
  ASSERT_EQ(d.combined.size(), 2u);
  EXPECT_NEAR(d.combined[0], 0.4 * d.lambda, 1e-12);
  EXPECT_NEAR(d.combined[1], 1.2 * d.lambda, 1e-12);
  EXPECT_NEAR(d.combined[0], 0.4472, 1e-4);
  EXPECT_NEAR(d.combined[1], 1.3416, 1e-4);
}

TEST(Combine, AntipodalIsDegenerate) {
  const ParetoDecision d = combine(fg({1, 0}), fg({-1, 0}));
  EXPECT_TRUE(d.conflict);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.combined, (std::vector<Scalar>{0, 0}));
}

TEST(Combine, ZeroUnimodalPassesTheMultimodalThrough) {
  const ParetoDecision d = combine(fg({0.3, -2}), fg({0, 0}));
  EXPECT_FALSE(d.conflict);
  EXPECT_EQ(d.combined, (std::vector<Scalar>{0.3, -2}));
}

TEST(Combine, RejectsLengthMismatch) { EXPECT_KIND(combine(fg({1}), fg({1, 2})), ErrorKind::LengthMismatch); }

TEST(Combine, PropertiesOnRandomPairs) {
  Rng rng(22);
  int conflicts = 0;
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng.uniform_int(8);
    const std::vector<Scalar> gm = testing::normals(rng, n), gu = testing::normals(rng, n);
    const ParetoDecision d = combine(fg(gm), fg(gu));
    ASSERT_EQ(d.conflict, d.cos_beta < 0);
    ASSERT_GE(d.alpha_m, 0);
    ASSERT_GE(d.alpha_u, 0);
    ASSERT_NEAR(d.alpha_m + d.alpha_u, 1, 1e-15);
    ASSERT_GE(d.cos_beta, -1 - 1e-12);
    ASSERT_LE(d.cos_beta, 1 + 1e-12);
    if (!d.conflict || d.degenerate) {
      ASSERT_EQ(d.lambda, 1);
      continue;
    }
    ++conflicts;
    std::vector<Scalar> sum(n);
    for (std::size_t i = 0; i < n; ++i) sum[i] = gm[i] + gu[i];
    ASSERT_GT(d.lambda, 1 - 1e-12);
    ASSERT_NEAR(norm_of(d.combined), norm_of(sum), 1e-9);
    ASSERT_GE(dot(d.combined, gm), -1e-9);
    ASSERT_GE(dot(d.combined, gu), -1e-9);
  }
  EXPECT_GT(conflicts, 500);
}

TEST(Combine, ScaleSymmetry) {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const std::vector<Scalar> gm = testing::normals(rng, 4), gu = testing::normals(rng, 4);
    const ParetoDecision base = combine(fg(gm), fg(gu));
    for (Scalar c : {0.5, 4.0}) {  // powers of two keep the scaling exact
      std::vector<Scalar> sm = gm, su = gu;
      for (Scalar& x : sm) x *= c;
      for (Scalar& x : su) x *= c;
      const ParetoDecision s = combine(fg(sm), fg(su));
      ASSERT_EQ(s.conflict, base.conflict);
      ASSERT_EQ(s.alpha_m, base.alpha_m);
      ASSERT_EQ(s.lambda, base.lambda);
      for (std::size_t i = 0; i < 4; ++i) ASSERT_EQ(s.combined[i], c * base.combined[i]);
    }
    const Scalar c = 3.7;
    std::vector<Scalar> sm = gm, su = gu;
    for (Scalar& x : sm) x *= c;
    for (Scalar& x : su) x *= c;
    const ParetoDecision s = combine(fg(sm), fg(su));
    ASSERT_NEAR(s.alpha_m, base.alpha_m, 1e-12);
    ASSERT_NEAR(s.lambda, base.lambda, 1e-12);
    for (std::size_t i = 0; i < 4; ++i) ASSERT_NEAR(s.combined[i], c * base.combined[i], 1e-12 * (1 + c));
  }
}

// Layout of a toy model with one encoder group per modality, a head group and
// decoder groups.
std::vector<ParamGroup> toy_layout() {
  std::vector<ParamGroup> layout;
  for (Modality m : kModalities) {
    const std::string t(tag(m));
    layout.push_back({"enc." + t, GroupRole::Encoder, m, {"enc." + t + ".w", "enc." + t + ".b"}});
  }
  layout.push_back({"head", GroupRole::Head, std::nullopt, {"head.w"}});
  for (Modality m : kModalities) {
    const std::string t(tag(m));
    layout.push_back({"dec." + t, GroupRole::Decoder, m, {"dec." + t + ".w"}});
  }
  return layout;
}

struct ToyGrads {
  GradientMap multi;
  PerModality<GradientMap> uni;
};

ToyGrads random_toy(Rng& rng) {
  ToyGrads g;
  for (Modality m : kModalities) {
    const std::string t(tag(m));
    g.multi["enc." + t + ".w"] = testing::random_matrix(rng, 2, 2);
    g.multi["enc." + t + ".b"] = Tensor::vector(testing::normals(rng, 2));
    g.uni[index_of(m)]["enc." + t + ".w"] = testing::random_matrix(rng, 2, 2);
    g.uni[index_of(m)]["enc." + t + ".b"] = Tensor::vector(testing::normals(rng, 2));
    g.uni[index_of(m)]["dec." + t + ".w"] = Tensor::vector(testing::normals(rng, 3));
  }
  g.multi["head.w"] = Tensor::vector(testing::normals(rng, 5));
  return g;
}

std::vector<Scalar> flat(const GradientMap& g, const std::string& group) {
  std::vector<Scalar> out;
  for (const char* leaf : {".w", ".b"}) {
    const Tensor& t = g.at(group + leaf);
    out.insert(out.end(), t.data().begin(), t.data().end());
  }
  return out;
}

TEST(Apply, ZeroUnimodalGivesTheMultimodalMap) {
  Rng rng(24);
  ToyGrads g = random_toy(rng);
  for (GradientMap& u : g.uni) {
    for (auto& [name, t] : u) t = Tensor::zeros(t.shape());
  }
  const MergeResult r = mcpareto_apply(toy_layout(), g.multi, g.uni);
  for (const auto& [name, t] : g.multi) EXPECT_EQ(r.merged.at(name), t) << name;
}

TEST(Apply, MatchesPerGroupCombineByHand) {
  Rng rng(25);
  const ToyGrads g = random_toy(rng);
  const MergeResult r = mcpareto_apply(toy_layout(), g.multi, g.uni);
  ASSERT_EQ(r.decisions.size(), 3u);
  for (Modality m : kModalities) {
    const std::string group = "enc." + std::string(tag(m));
    const ParetoDecision d = combine(FlatGrad(group, flat(g.multi, group)), FlatGrad(group, flat(g.uni[index_of(m)], group)));
    EXPECT_EQ(flat(r.merged, group), d.combined);
    EXPECT_EQ(r.decisions[index_of(m)].group, group);
    EXPECT_EQ(r.decisions[index_of(m)].modality, m);
    const std::string dec = "dec." + std::string(tag(m)) + ".w";
    EXPECT_EQ(r.merged.at(dec), g.uni[index_of(m)].at(dec));
  }
  EXPECT_EQ(r.merged.at("head.w"), g.multi.at("head.w"));
}

TEST(Apply, EncoderOutputsNeverOpposeTheirSources) {
  Rng rng(26);
  for (int t = 0; t < 200; ++t) {
    const ToyGrads g = random_toy(rng);
    const MergeResult r = mcpareto_apply(toy_layout(), g.multi, g.uni);
    for (Modality m : kModalities) {
      const std::string group = "enc." + std::string(tag(m));
      const std::vector<Scalar> out = flat(r.merged, group);
      if (r.decisions[index_of(m)].decision.degenerate) continue;
      ASSERT_GE(dot(out, flat(g.multi, group)), -1e-9);
      ASSERT_GE(dot(out, flat(g.uni[index_of(m)], group)), -1e-9);
    }
  }
}

TEST(Apply, SumModeAddsAndStillRecordsDecisions) {
  Rng rng(27);
  const ToyGrads g = random_toy(rng);
  const MergeResult r = mcpareto_apply(toy_layout(), g.multi, g.uni, MergeMode::Sum);
  ASSERT_EQ(r.decisions.size(), 3u);
  for (Modality m : kModalities) {
    const std::string w = "enc." + std::string(tag(m)) + ".w";
    const Tensor& a = g.multi.at(w);
    const Tensor& b = g.uni[index_of(m)].at(w);
    for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(r.merged.at(w)[i], a[i] + b[i]);
  }
}

TEST(Apply, GroupMismatch) {
  Rng rng(28);
  ToyGrads g = random_toy(rng);
  ToyGrads missing = g;
  missing.uni[index_of(Modality::Audio)].erase("enc.a.b");
  EXPECT_KIND(mcpareto_apply(toy_layout(), missing.multi, missing.uni), ErrorKind::GroupMismatch);
  ToyGrads stray = g;
  stray.multi["nowhere"] = Tensor::scalar(1);
  EXPECT_KIND(mcpareto_apply(toy_layout(), stray.multi, stray.uni), ErrorKind::GroupMismatch);
}

}  // namespace
}  // namespace kanmcp::pareto
